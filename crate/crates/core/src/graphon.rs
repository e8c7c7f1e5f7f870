//! Graphon models, their derived functionals, and the model matrix.
//!
//! A graphon is a symmetric kernel `w : [0,1]^2 -> [0,1]`. Vertex `i` of an
//! `n`-vertex sample sits at latent position `i/n` (grid embedding).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SeriationError};
use crate::matrix::DenseMatrix;

/// Kernel families understood by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `w = 1 - a |x-y|^b`
    AffineDistance,
    /// `w = exp(-(x-y)^2 / 2 s^2)`
    Rbf,
    /// `w = p 1[|x-y| <= c]`
    Step,
    /// `w = c`
    Constant,
    /// Tabulated grid or user closure.
    Custom,
}

/// Serializable description of a graphon.
///
/// In TOML form the family is named by the `family` key and the remaining
/// keys are its parameters:
///
/// ```toml
/// family = "affine-distance"
/// a = 0.8
/// b = 1.0
/// ```
///
/// The inline form used on the command line is `family:key=value,key=value`,
/// e.g. `rbf:s=0.3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GraphonSpec {
    AffineDistance { a: f64, b: f64 },
    Rbf { s: f64 },
    Step { p: f64, c: f64 },
    Constant { c: f64 },
    /// Square grid of values at points `(i/(m-1), j/(m-1))`, bilinearly interpolated.
    Tabulated { values: Vec<Vec<f64>> },
}

/// Latent position scheme. Only the deterministic grid `v_i = i/n` exists.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Embedding {
    #[default]
    Grid,
}

/// A graphon spec together with its optional metadata, as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphonConfig {
    #[serde(flatten)]
    pub spec: GraphonSpec,
    #[serde(default)]
    pub embedding: Embedding,
    /// Overrides the known Lipschitz constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

impl GraphonConfig {
    pub fn build(&self) -> Result<Graphon> {
        let mut g = Graphon::from_spec(&self.spec)?;
        if let Some(k) = self.lipschitz {
            if !(k >= 0.0) {
                return Err(SeriationError::arg("lipschitz constant must be nonnegative"));
            }
            g.lipschitz = Some(k);
        }
        Ok(g)
    }

    /// Parses a config file. Errors carry the 1-based line of the offending key.
    pub fn from_toml(text: &str) -> Result<Self> {
        // Typed deserialisation of the flattened enum loses source spans, so the
        // header and the family parameters are read as plain structs.
        #[derive(Deserialize)]
        struct Head {
            family: String,
            #[serde(default)]
            embedding: Embedding,
            lipschitz: Option<f64>,
        }
        #[derive(Deserialize)]
        struct Affine {
            a: f64,
            b: f64,
        }
        #[derive(Deserialize)]
        struct Rbf {
            s: f64,
        }
        #[derive(Deserialize)]
        struct Step {
            p: f64,
            c: f64,
        }
        #[derive(Deserialize)]
        struct Constant {
            c: f64,
        }
        #[derive(Deserialize)]
        struct Tabulated {
            values: Vec<Vec<f64>>,
        }
        fn de<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
            toml::from_str(text).map_err(|e| toml_error(text, e))
        }

        let table: toml::Table = de(text)?;
        let head: Head = de(text)?;
        let (spec, keys): (GraphonSpec, &[&str]) = match head.family.as_str() {
            "affine-distance" => {
                let p: Affine = de(text)?;
                (GraphonSpec::AffineDistance { a: p.a, b: p.b }, &["a", "b"])
            }
            "rbf" => (GraphonSpec::Rbf { s: de::<Rbf>(text)?.s }, &["s"]),
            "step" => {
                let p: Step = de(text)?;
                (GraphonSpec::Step { p: p.p, c: p.c }, &["p", "c"])
            }
            "constant" => (GraphonSpec::Constant { c: de::<Constant>(text)?.c }, &["c"]),
            "tabulated" => (GraphonSpec::Tabulated { values: de::<Tabulated>(text)?.values }, &["values"]),
            other => {
                return Err(SeriationError::parse(key_line(text, "family"), format!("unknown graphon family `{other}`")))
            }
        };
        for key in table.keys() {
            if !["family", "embedding", "lipschitz"].contains(&key.as_str()) && !keys.contains(&key.as_str()) {
                return Err(SeriationError::parse(
                    key_line(text, key),
                    format!("unexpected key `{key}` for family `{}`", head.family),
                ));
            }
        }
        Ok(GraphonConfig { spec, embedding: head.embedding, lipschitz: head.lipschitz })
    }
}

/// 1-based line on which `key` is assigned, or 0 if it cannot be located.
pub(crate) fn key_line(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(0, |i| i + 1)
}

pub(crate) fn toml_error(text: &str, e: toml::de::Error) -> SeriationError {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    SeriationError::parse(line, e.message().to_string())
}

impl FromStr for GraphonSpec {
    type Err = SeriationError;

    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = Vec::new();
        for kv in rest.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| SeriationError::parse(1, format!("expected key=value, got `{kv}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| SeriationError::parse(1, format!("bad number for `{}`", k.trim())))?;
            params.push((k.trim().to_string(), v));
        }
        let get = |name: &str| {
            params
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| SeriationError::parse(1, format!("missing parameter `{name}` for {family}")))
        };
        let spec = match family.trim() {
            "affine-distance" => GraphonSpec::AffineDistance { a: get("a")?, b: get("b")? },
            "rbf" => GraphonSpec::Rbf { s: get("s")? },
            "step" => GraphonSpec::Step { p: get("p")?, c: get("c")? },
            "constant" => GraphonSpec::Constant { c: get("c")? },
            other => return Err(SeriationError::parse(1, format!("unknown graphon family `{other}`"))),
        };
        Ok(spec)
    }
}

impl fmt::Display for GraphonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphonSpec::AffineDistance { a, b } => write!(f, "affine-distance:a={a},b={b}"),
            GraphonSpec::Rbf { s } => write!(f, "rbf:s={s}"),
            GraphonSpec::Step { p, c } => write!(f, "step:p={p},c={c}"),
            GraphonSpec::Constant { c } => write!(f, "constant:c={c}"),
            GraphonSpec::Tabulated { values } => write!(f, "tabulated:{}x{}", values.len(), values.len()),
        }
    }
}

type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kernel {
    AffineDistance { a: f64, b: f64 },
    Rbf { s: f64 },
    Step { p: f64, c: f64 },
    Constant { c: f64 },
    Tabulated(TabulatedKernel),
    Custom(KernelFn),
}

#[derive(Clone)]
struct TabulatedKernel {
    m: usize,
    values: Vec<f64>,
}

impl TabulatedKernel {
    fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if m < 2 {
            return Err(SeriationError::arg("tabulated kernel needs at least a 2x2 grid"));
        }
        let grid = DenseMatrix::from_rows(rows)?;
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let v = 0.5 * (grid.get(i, j) + grid.get(j, i));
                if !(0.0..=1.0).contains(&v) {
                    return Err(SeriationError::arg(format!("tabulated value {v} at ({i},{j}) outside [0,1]")));
                }
                values[i * m + j] = v;
            }
        }
        Ok(TabulatedKernel { m, values })
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        let last = (self.m - 1) as f64;
        let (fx, fy) = (x * last, y * last);
        let i = (fx.floor() as usize).min(self.m - 2);
        let j = (fy.floor() as usize).min(self.m - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let at = |a: usize, b: usize| self.values[a * self.m + b];
        (1.0 - tx) * (1.0 - ty) * at(i, j)
            + tx * (1.0 - ty) * at(i + 1, j)
            + (1.0 - tx) * ty * at(i, j + 1)
            + tx * ty * at(i + 1, j + 1)
    }
}

/// A symmetric kernel on the unit square with optional Lipschitz metadata.
#[derive(Clone)]
pub struct Graphon {
    kernel: Kernel,
    lipschitz: Option<f64>,
}

impl fmt::Debug for Graphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.kernel {
            Kernel::AffineDistance { a, b } => format!("AffineDistance(a={a}, b={b})"),
            Kernel::Rbf { s } => format!("Rbf(s={s})"),
            Kernel::Step { p, c } => format!("Step(p={p}, c={c})"),
            Kernel::Constant { c } => format!("Constant({c})"),
            Kernel::Tabulated(t) => format!("Tabulated({}x{})", t.m, t.m),
            Kernel::Custom(_) => "Custom".to_string(),
        };
        f.debug_struct("Graphon").field("kernel", &name).field("lipschitz", &self.lipschitz).finish()
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SeriationError::arg(format!("{name} = {v} must lie in [0,1]")))
    }
}

impl Graphon {
    pub fn affine_distance(a: f64, b: f64) -> Result<Self> {
        check_unit("a", a)?;
        if !(b > 0.0) || !b.is_finite() {
            return Err(SeriationError::arg(format!("exponent b = {b} must be positive")));
        }
        // sup |R'| for R(u) = 1 - a u^b; unbounded when b < 1.
        let lipschitz = if b >= 1.0 { Some(a * b) } else if a == 0.0 { Some(0.0) } else { None };
        Ok(Graphon { kernel: Kernel::AffineDistance { a, b }, lipschitz })
    }

    pub fn rbf(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(SeriationError::arg(format!("rbf width s = {s} must be positive")));
        }
        // |R'(u)| = u/s^2 exp(-u^2/2s^2) peaks at u = s, clipped to u <= 1.
        let u = s.min(1.0);
        let lipschitz = u / (s * s) * (-u * u / (2.0 * s * s)).exp();
        Ok(Graphon { kernel: Kernel::Rbf { s }, lipschitz: Some(lipschitz) })
    }

    pub fn step(p: f64, c: f64) -> Result<Self> {
        check_unit("p", p)?;
        check_unit("c", c)?;
        let lipschitz = if p == 0.0 || c >= 1.0 { Some(0.0) } else { None };
        Ok(Graphon { kernel: Kernel::Step { p, c }, lipschitz })
    }

    pub fn constant(c: f64) -> Result<Self> {
        check_unit("c", c)?;
        Ok(Graphon { kernel: Kernel::Constant { c }, lipschitz: Some(0.0) })
    }

    pub fn tabulated(values: &[Vec<f64>]) -> Result<Self> {
        Ok(Graphon { kernel: Kernel::Tabulated(TabulatedKernel::new(values)?), lipschitz: None })
    }

    /// Wraps a user kernel. Symmetry and range are checked on a 33x33 grid of test points.
    pub fn custom(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, lipschitz: Option<f64>) -> Result<Self> {
        const PROBE: usize = 33;
        for i in 0..PROBE {
            for j in 0..PROBE {
                let (x, y) = (i as f64 / (PROBE - 1) as f64, j as f64 / (PROBE - 1) as f64);
                let (v, w) = (f(x, y), f(y, x));
                if !(0.0..=1.0).contains(&v) {
                    return Err(SeriationError::arg(format!("kernel({x},{y}) = {v} outside [0,1]")));
                }
                if (v - w).abs() > 1e-12 {
                    return Err(SeriationError::arg(format!("kernel not symmetric at ({x},{y})")));
                }
            }
        }
        Ok(Graphon { kernel: Kernel::Custom(Arc::new(f)), lipschitz })
    }

    pub fn from_spec(spec: &GraphonSpec) -> Result<Self> {
        match spec {
            GraphonSpec::AffineDistance { a, b } => Self::affine_distance(*a, *b),
            GraphonSpec::Rbf { s } => Self::rbf(*s),
            GraphonSpec::Step { p, c } => Self::step(*p, *c),
            GraphonSpec::Constant { c } => Self::constant(*c),
            GraphonSpec::Tabulated { values } => Self::tabulated(values),
        }
    }

    pub fn family(&self) -> Family {
        match self.kernel {
            Kernel::AffineDistance { .. } => Family::AffineDistance,
            Kernel::Rbf { .. } => Family::Rbf,
            Kernel::Step { .. } => Family::Step,
            Kernel::Constant { .. } => Family::Constant,
            Kernel::Tabulated(_) | Kernel::Custom(_) => Family::Custom,
        }
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    /// Whether the kernel is of the form `R(|x-y|)` with `R > 0` and `R' < 0`.
    pub fn is_nice(&self) -> bool {
        match self.kernel {
            Kernel::AffineDistance { a, b } => a > 0.0 && a < 1.0 + f64::EPSILON && b >= 1.0,
            Kernel::Rbf { .. } => true,
            _ => false,
        }
    }

    /// Kernel value without domain checks. Callers guarantee `x, y` in [0,1].
    #[inline]
    pub fn kernel(&self, x: f64, y: f64) -> f64 {
        match &self.kernel {
            Kernel::AffineDistance { a, b } => {
                let d = (x - y).abs();
                if *b == 1.0 {
                    1.0 - a * d
                } else {
                    1.0 - a * d.powf(*b)
                }
            }
            Kernel::Rbf { s } => {
                let d = x - y;
                (-d * d / (2.0 * s * s)).exp()
            }
            Kernel::Step { p, c } => {
                if (x - y).abs() <= *c {
                    *p
                } else {
                    0.0
                }
            }
            Kernel::Constant { c } => *c,
            Kernel::Tabulated(t) => t.eval(x, y),
            Kernel::Custom(f) => f(x, y),
        }
    }

    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(SeriationError::arg(format!("point ({x}, {y}) outside the unit square")));
        }
        Ok(self.kernel(x, y))
    }

    /// `P_ij = w(i/n, j/n)` for `i, j` in `1..=n`.
    pub fn model_matrix(&self, n: usize) -> Result<ModelMatrix> {
        if n == 0 {
            return Err(SeriationError::arg("model matrix needs n >= 1"));
        }
        let nf = n as f64;
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            let x = (i + 1) as f64 / nf;
            for j in i..n {
                let v = self.kernel(x, (j + 1) as f64 / nf);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        Ok(ModelMatrix { matrix: m })
    }

    /// Degree `d(x) = ∫_0^1 w(x,y) dy` by the composite midpoint rule.
    pub fn degree_function(&self, x: f64, quad_points: usize) -> Result<f64> {
        if quad_points < 2 {
            return Err(SeriationError::arg("quadrature needs at least 2 panels"));
        }
        check_unit("x", x)?;
        Ok(midpoint(0.0, 1.0, quad_points, |y| self.kernel(x, y)))
    }

    /// `(Ψ_R(x), Ψ_L(x))`: mass of `w(x, ·)` over `[1-α, 1]` and `[0, α]`.
    pub fn psi_functions(&self, alpha: f64, x: f64, quad_points: usize) -> Result<(f64, f64)> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(SeriationError::arg(format!("alpha = {alpha} must lie in (0, 0.5)")));
        }
        if quad_points < 2 {
            return Err(SeriationError::arg("quadrature needs at least 2 panels"));
        }
        check_unit("x", x)?;
        let right = midpoint(1.0 - alpha, 1.0, quad_points, |y| self.kernel(x, y));
        let left = midpoint(0.0, alpha, quad_points, |y| self.kernel(x, y));
        Ok((right, left))
    }
}

/// Composite midpoint rule with `panels` equal panels.
pub(crate) fn midpoint(lo: f64, hi: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / panels as f64;
    let s: f64 = (0..panels).map(|k| f(lo + (k as f64 + 0.5) * h)).sum();
    s * h
}

/// Noise-free edge probabilities at the grid positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrix {
    matrix: DenseMatrix,
}

impl ModelMatrix {
    pub fn n(&self) -> usize {
        self.matrix.dim()
    }

    /// Entry for 0-based indices (vertex `i+1`, vertex `j+1`).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }
}

/// Nice graphons used as the reference family by the validators and acceptance runs.
pub fn nice_catalog() -> Vec<(String, Graphon)> {
    let mut out = Vec::new();
    for a in [0.5, 0.8, 1.0] {
        for b in [1.0, 2.0] {
            out.push((format!("affine-distance:a={a},b={b}"), Graphon::affine_distance(a, b).unwrap()));
        }
    }
    for s in [0.3, 0.5] {
        out.push((format!("rbf:s={s}"), Graphon::rbf(s).unwrap()));
    }
    out
}
