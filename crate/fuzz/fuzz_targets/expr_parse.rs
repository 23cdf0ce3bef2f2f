#![no_main]
use libfuzzer_sys::fuzz_target;
use obstacle_dpp::expr::Expr;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(expr) = Expr::parse(s) {
            // the printed form must parse back to the same function
            let again = Expr::parse(&expr.to_string()).expect("display reparses");
            let (a, b) = (expr.eval(0.3, 0.7), again.eval(0.3, 0.7));
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }
});
