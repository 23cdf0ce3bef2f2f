//! Obstacles `psi1 <= psi2`, boundary datum `f`, and the shipped datasets.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::mesh::Mesh;

/// Magnitude used for obstacles that should never be touched.
pub const INACTIVE: f64 = 1e6;

/// A real function of `(x, y)`, kept together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    source: String,
    expr: Expr,
}

impl ScalarField {
    pub fn parse(source: &str) -> Result<Self> {
        Ok(ScalarField {
            expr: Expr::parse(source)?,
            source: source.trim().to_string(),
        })
    }

    pub fn constant(c: f64) -> Self {
        ScalarField {
            source: format!("{c:?}"),
            expr: Expr::Num(c),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Raw value; may be NaN or infinite for user expressions.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.expr.eval(x, y)
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let v = self.value(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvalDomain {
                field: self.source.clone(),
                x,
                y,
            })
        }
    }

    /// `self + c`; evaluates to exactly `self.value(x, y) + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let src = format!("({}) + {}", self.source, fmt_num(c));
        ScalarField {
            expr: Expr::Binary(
                crate::expr::BinOp::Add,
                Box::new(self.expr.clone()),
                Box::new(Expr::Num(c)),
            ),
            source: src,
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

/// Shortest round-tripping literal that the expression parser accepts.
fn fmt_num(c: f64) -> String {
    if c < 0.0 {
        format!("(-{:?})", -c)
    } else {
        format!("{c:?}")
    }
}

/// Exponent `p` plus the three data fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub p: f64,
    pub psi1: ScalarField,
    pub psi2: ScalarField,
    pub f: ScalarField,
}

impl ProblemSpec {
    pub fn new(p: f64, psi1: ScalarField, psi2: ScalarField, f: ScalarField) -> Self {
        ProblemSpec { p, psi1, psi2, f }
    }

    /// Adds `c` to all three fields.
    pub fn shifted(&self, c: f64) -> Self {
        ProblemSpec {
            p: self.p,
            psi1: self.psi1.shifted(c),
            psi2: self.psi2.shifted(c),
            f: self.f.shifted(c),
        }
    }

    /// Rewrites the obstacles so the ordering constraints hold on the
    /// square of half-width `a`, without changing the discrete operator:
    /// the upper obstacle becomes `max(psi1, psi2)`, and outside the square
    /// the obstacles are widened to contain `f`. Interior nodes only ever
    /// see `max(psi1, min(psi2, .))`, which is unchanged by the first
    /// rewrite; collar obstacle values are never read.
    pub fn reconciled(&self, a: f64) -> Result<Self> {
        let (p1, p2, f) = (&self.psi1.source, &self.psi2.source, &self.f.source);
        let outside = format!("max(abs(x), abs(y)) >= {}", fmt_num(a - 1e-9));
        let psi1 = format!("if({outside}, min({p1}, {f}), {p1})");
        let psi2 = format!("if({outside}, max({p2}, {f}), max({p1}, {p2}))");
        Ok(ProblemSpec {
            p: self.p,
            psi1: ScalarField::parse(&psi1)?,
            psi2: ScalarField::parse(&psi2)?,
            f: self.f.clone(),
        })
    }
}

/// Field values sampled at every mesh node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeData {
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    pub f: Vec<f64>,
}

impl NodeData {
    pub fn sample(spec: &ProblemSpec, mesh: &Mesh) -> Result<Self> {
        let sample = |field: &ScalarField| -> Result<Vec<f64>> {
            mesh.nodes().iter().map(|&[x, y]| field.eval(x, y)).collect()
        };
        Ok(NodeData {
            psi1: sample(&spec.psi1)?,
            psi2: sample(&spec.psi2)?,
            f: sample(&spec.f)?,
        })
    }

    pub fn len(&self) -> usize {
        self.psi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi1.is_empty()
    }

    /// Checks `psi1 <= psi2` on every node and `psi1 <= f <= psi2` on
    /// collar nodes.
    pub fn check_order(&self, mesh: &Mesh) -> Result<()> {
        for v in [&self.psi1, &self.psi2, &self.f] {
            if v.len() != mesh.len() {
                return Err(Error::ShapeMismatch {
                    expected: mesh.len(),
                    got: v.len(),
                });
            }
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        let bad: Vec<usize> = (0..mesh.len())
            .filter(|&i| self.psi1[i] > self.psi2[i])
            .collect();
        if !bad.is_empty() {
            return Err(Error::ObstacleOrderViolation { nodes: bad });
        }
        let bad: Vec<usize> = mesh
            .collar_nodes()
            .filter(|&i| self.f[i] < self.psi1[i] || self.f[i] > self.psi2[i])
            .collect();
        if !bad.is_empty() {
            return Err(Error::BoundaryOrderViolation { nodes: bad });
        }
        Ok(())
    }
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p >= 2.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange(p))
    }
}

/// Validates the exponent and the node-wise ordering constraints.
pub fn validate_problem(spec: &ProblemSpec, mesh: &Mesh) -> Result<()> {
    check_exponent(spec.p)?;
    NodeData::sample(spec, mesh)?.check_order(mesh)
}

const TRY1_PSI1: &str = "max(1 - 33*(x+0.5)^2 - 27*(y+0.1)^2, \
     0.5 - 40*(x+0.3)^2 - 34*(y+0.4)^2, \
     0.5 - 36*(x-0.6)^2 - 51*(y-0.7)^2, -2)";
const TRY1_PSI2: &str = "min(33*(x+0.6)^2 + 27*(y-0.6)^2 - 1, 33*(x-0.6)^2 + 27*(y+0.6)^2 - 1, 2)";

const SMOOTH_PSI1: &str = "max(2 - 33*(x+0.5)^2 - 27*(y+0.1)^2, \
     1.5 - 40*(x+0.3)^2 - 34*(y+0.4)^2, \
     2.5 - 36*(x-0.6)^2 - 51*(y-0.7)^2, -3)";
const SMOOTH_PSI2: &str = "min(33*(x+0.6)^2 + 27*(y-0.6)^2 - 3, 33*(x-0.6)^2 + 27*(y+0.6)^2 - 3, 3)";

// closed middle band wins at y = +-0.5, where all branches agree anyway
const LIPSCHITZ_PSI1: &str = "if(y >= -0.5 && y <= 0.5, 2 - 17*abs(x-0.5), \
     if(y < -0.5, 2 - 17*abs(x-0.5) - 17*abs(y+0.5), 2 - 17*abs(x-0.5) - 17*abs(y-0.5)))";
const LIPSCHITZ_PSI2: &str = "-4 + 12*abs(y+0.2) + 15*abs(x-0.7)";

pub const QUADRATIC_SOLUTION: &str = "x^2 - y^2 - y";
pub const EXPSIN_SOLUTION: &str = "exp(x)*sin(y)";

/// Names accepted by [`builtin_dataset`]. `fundamental_p<P>` takes any
/// `P >= 2`; `fundamental_pN` is an alias for `P = 10`.
pub const DATASETS: &[&str] = &[
    "try1_p2",
    "try1_p100",
    "case_a_p10",
    "case_b_p10",
    "case_c_p10",
    "harmonic_quadratic_p2",
    "harmonic_expsin_p2",
    "fundamental_pN",
];

fn parse3(p: f64, psi1: &str, psi2: &str, f: &str) -> ProblemSpec {
    let field = |s: &str| ScalarField::parse(s).expect("built-in formula parses");
    ProblemSpec::new(p, field(psi1), field(psi2), field(f))
}

fn unconstrained(p: f64, f: &str) -> ProblemSpec {
    ProblemSpec::new(
        p,
        ScalarField::constant(-INACTIVE),
        ScalarField::constant(INACTIVE),
        ScalarField::parse(f).expect("built-in formula parses"),
    )
}

fn fundamental_exponent(name: &str) -> Option<f64> {
    let tail = name.strip_prefix("fundamental_p")?;
    if tail == "N" {
        return Some(10.0);
    }
    tail.parse::<f64>().ok().filter(|p| *p >= 2.0 && p.is_finite())
}

/// Radial `p`-harmonic profile centered at `(2, 2)`, outside the board.
pub fn fundamental_solution(p: f64) -> ScalarField {
    let q = (p - 2.0) / (p - 1.0) / 2.0;
    ScalarField::parse(&format!("((x-2)^2 + (y-2)^2)^{}", fmt_num(q)))
        .expect("formula parses")
}

/// The datasets as printed, without the ordering repair applied to
/// `case_b_p10` and `case_c_p10` by [`builtin_dataset`].
pub fn printed_dataset(name: &str) -> Result<ProblemSpec> {
    Ok(match name {
        "try1_p2" => parse3(2.0, TRY1_PSI1, TRY1_PSI2, "0"),
        "try1_p100" => parse3(100.0, TRY1_PSI1, TRY1_PSI2, "0"),
        "case_a_p10" => parse3(10.0, SMOOTH_PSI1, SMOOTH_PSI2, "1 - 2*y^2"),
        "case_b_p10" => parse3(10.0, LIPSCHITZ_PSI1, LIPSCHITZ_PSI2, "0"),
        "case_c_p10" => parse3(10.0, SMOOTH_PSI1, SMOOTH_PSI2, "2 - (x+y)^2"),
        "harmonic_quadratic_p2" => unconstrained(2.0, QUADRATIC_SOLUTION),
        "harmonic_expsin_p2" => unconstrained(2.0, EXPSIN_SOLUTION),
        _ => match fundamental_exponent(name) {
            Some(p) => ProblemSpec::new(
                p,
                ScalarField::constant(-INACTIVE),
                ScalarField::constant(INACTIVE),
                fundamental_solution(p),
            ),
            None => return Err(Error::UnknownDataset(name.to_string())),
        },
    })
}

/// Looks up a shipped dataset. All are posed on `(-1, 1)²`.
pub fn builtin_dataset(name: &str) -> Result<ProblemSpec> {
    let spec = printed_dataset(name)?;
    match name {
        // printed psi2 dips below psi1 (case b) and f leaves [psi1, psi2]
        // on the collar (case c)
        "case_b_p10" | "case_c_p10" => spec.reconciled(1.0),
        _ => Ok(spec),
    }
}

/// Exact solution for the datasets that have one.
pub fn known_solution(name: &str) -> Option<ScalarField> {
    match name {
        "harmonic_quadratic_p2" => ScalarField::parse(QUADRATIC_SOLUTION).ok(),
        "harmonic_expsin_p2" => ScalarField::parse(EXPSIN_SOLUTION).ok(),
        _ => fundamental_exponent(name).map(fundamental_solution),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh() -> Mesh {
        Mesh::with_radius_units(0.05, 1.0, 0.2, 3).unwrap()
    }

    #[test]
    fn hand_substituted_values() {
        let d = builtin_dataset("try1_p2").unwrap();
        assert_eq!(d.p, 2.0);
        assert_eq!(d.psi1.eval(-0.5, -0.1).unwrap(), 1.0);
        assert_eq!(d.psi2.eval(0.6, -0.6).unwrap(), -1.0);
        assert_eq!(d.f.eval(0.3, -0.7).unwrap(), 0.0);
        let a = builtin_dataset("case_a_p10").unwrap();
        assert_eq!(a.p, 10.0);
        assert_eq!(a.f.eval(0.0, 0.5).unwrap(), 0.5);
        let q = builtin_dataset("harmonic_quadratic_p2").unwrap();
        assert_eq!(q.f.eval(1.0, 2.0).unwrap(), 1.0 - 4.0 - 2.0);
        assert_eq!(q.psi1.eval(0.0, 0.0).unwrap(), -INACTIVE);
    }

    #[test]
    fn all_builtins_validate() {
        let m = mesh();
        for name in DATASETS.iter().copied().chain(["fundamental_p3", "fundamental_p25"]) {
            let spec = builtin_dataset(name).unwrap();
            validate_problem(&spec, &m).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        // the h = 0.1 board used by the game experiments
        let coarse = Mesh::with_radius_units(0.1, 1.0, 0.4, 3).unwrap();
        for name in DATASETS {
            validate_problem(&builtin_dataset(name).unwrap(), &coarse).unwrap();
        }
    }

    #[test]
    fn printed_cases_violate_ordering() {
        let m = mesh();
        assert!(matches!(
            validate_problem(&printed_dataset("case_b_p10").unwrap(), &m),
            Err(Error::ObstacleOrderViolation { .. })
        ));
        assert!(matches!(
            validate_problem(&printed_dataset("case_c_p10").unwrap(), &m),
            Err(Error::BoundaryOrderViolation { .. })
        ));
    }

    #[test]
    fn reconciliation_keeps_interior_clamp() {
        let m = mesh();
        for name in ["case_b_p10", "case_c_p10"] {
            let raw = NodeData::sample(&printed_dataset(name).unwrap(), &m).unwrap();
            let fixed = NodeData::sample(&builtin_dataset(name).unwrap(), &m).unwrap();
            assert_eq!(raw.f, fixed.f);
            for &i in m.interior_nodes() {
                assert_eq!(raw.psi1[i], fixed.psi1[i]);
                for v in [-5.0, -1.0, 0.0, 0.3, 2.0, 7.0] {
                    let clamp = |lo: f64, hi: f64| lo.max(hi.min(v));
                    assert_eq!(clamp(raw.psi1[i], raw.psi2[i]), clamp(fixed.psi1[i], fixed.psi2[i]));
                }
            }
        }
    }

    #[test]
    fn ordering_errors() {
        let m = mesh();
        let c = ScalarField::constant;
        let spec = ProblemSpec::new(2.0, c(1.0), c(0.0), c(0.5));
        match validate_problem(&spec, &m) {
            Err(Error::ObstacleOrderViolation { nodes }) => assert_eq!(nodes.len(), m.len()),
            other => panic!("{other:?}"),
        }
        let spec = ProblemSpec::new(2.0, c(-1.0), c(1.0), c(2.0));
        match validate_problem(&spec, &m) {
            Err(Error::BoundaryOrderViolation { nodes }) => {
                assert_eq!(nodes, m.collar_nodes().collect::<Vec<_>>())
            }
            other => panic!("{other:?}"),
        }
        let spec = ProblemSpec::new(1.5, c(-1.0), c(1.0), c(0.0));
        assert!(matches!(
            validate_problem(&spec, &m),
            Err(Error::ExponentOutOfRange(_))
        ));
    }

    #[test]
    fn eval_domain_error() {
        let f = ScalarField::parse("1 / x").unwrap();
        assert!(matches!(f.eval(0.0, 1.0), Err(Error::EvalDomain { .. })));
        assert_eq!(f.eval(2.0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn unknown_dataset() {
        assert!(matches!(builtin_dataset("try2"), Err(Error::UnknownDataset(_))));
        assert!(matches!(builtin_dataset("fundamental_p1"), Err(Error::UnknownDataset(_))));
    }

    #[test]
    fn shift_is_exact() {
        let spec = builtin_dataset("case_a_p10").unwrap();
        let c = 0.37;
        let s = spec.shifted(c);
        for &[x, y] in mesh().nodes().iter().step_by(7) {
            assert_eq!(s.psi1.value(x, y), spec.psi1.value(x, y) + c);
            assert_eq!(s.psi2.value(x, y), spec.psi2.value(x, y) + c);
            assert_eq!(s.f.value(x, y), spec.f.value(x, y) + c);
        }
        // the echoed source text parses to the same values
        let again = ScalarField::parse(s.f.source()).unwrap();
        assert_eq!(again.value(0.3, 0.4), s.f.value(0.3, 0.4));
    }
}
