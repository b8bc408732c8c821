//! System model types, validation, discretization, and JSON loading.
//!
//! A [`DiscreteSystem`] is the full plant description
//!
//! ```text
//! x[n+1] = A x[n] + B u[n] + G w[n]
//! y[n]   = C x[n] + D u[n] + H w[n]
//! z[n]   = Cm x[n] + Dm u[n] + Hm w[n] + v[n]
//! ```
//!
//! with noise second moments `Q = E(w w')`, `R = E(v v')`, `N = E(w v')`.
//! A [`ContinuousSystem`] holds the same matrices for the continuous-time
//! plant and is turned into a `DiscreteSystem` by [`discretize`].
//!
//! Construction always validates; a system that exists is dimensionally
//! consistent, finite, and has admissible noise covariances.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::gaussian;
use crate::{Error, Result};

/// Discretization rule for [`discretize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscretizationMethod {
    /// Forward Euler: `Ad = I + A dt`, `Bd = B dt`, `Gd = G dt`.
    Euler,
    /// Zero-order hold: `Ad = exp(A dt)` with the exact input/noise
    /// integrals `Bd = (Int_0^dt exp(A s) ds) B` and likewise for `Gd`.
    ZeroOrderHold,
}

/// Result of checking a system against its structural invariants. Collects
/// every violation rather than stopping at the first one.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn issues(&self) -> &[String] {
        &self.issues
    }

    fn push(&mut self, issue: String) {
        self.issues.push(issue);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            write!(f, "ok")
        } else {
            write!(f, "{}", self.issues.join("; "))
        }
    }
}

/// Discrete-time plant with process-noise feedthrough and possibly
/// correlated process/measurement noise.
///
/// Fields are named after the standard matrices; `n` is the cross-covariance
/// `E(w v')`, not a dimension. Dimensions are read off the matrices via
/// [`nx`](Self::nx), [`nu`](Self::nu), [`nw`](Self::nw), [`ny`](Self::ny),
/// and [`nz`](Self::nz).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub cm: DMatrix<f64>,
    pub dm: DMatrix<f64>,
    pub hm: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub n: DMatrix<f64>,
    /// Sample period the discrete model steps at, in seconds.
    pub dt: f64,
}

impl DiscreteSystem {
    /// Builds a system, failing with [`Error::InvalidSystem`] listing every
    /// violated invariant if the matrices are inconsistent.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        g: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        h: DMatrix<f64>,
        cm: DMatrix<f64>,
        dm: DMatrix<f64>,
        hm: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        n: DMatrix<f64>,
        dt: f64,
    ) -> Result<Self> {
        let sys = Self {
            a,
            b,
            g,
            c,
            d,
            h,
            cm,
            dm,
            hm,
            q,
            r,
            n,
            dt,
        };
        let report = sys.validate();
        if report.is_valid() {
            Ok(sys)
        } else {
            Err(Error::InvalidSystem(report.to_string()))
        }
    }

    pub fn nx(&self) -> usize {
        self.a.nrows()
    }

    pub fn nu(&self) -> usize {
        self.b.ncols()
    }

    pub fn nw(&self) -> usize {
        self.g.ncols()
    }

    pub fn ny(&self) -> usize {
        self.c.nrows()
    }

    pub fn nz(&self) -> usize {
        self.cm.nrows()
    }

    /// Effective measurement-noise covariance once the feedthrough of the
    /// process noise is folded in:
    /// `Rbar = R + Hm Q Hm' + Hm N + N' Hm'`.
    pub fn rbar(&self) -> DMatrix<f64> {
        &self.r
            + &self.hm * &self.q * self.hm.transpose()
            + &self.hm * &self.n
            + self.n.transpose() * self.hm.transpose()
    }

    /// Checks every structural invariant and reports all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut report = matrix_invariants(
            &self.a, &self.b, &self.g, &self.c, &self.d, &self.h, &self.cm, &self.dm, &self.hm,
            &self.q, &self.r, &self.n,
        );
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            report.push(format!("dt must be positive and finite, got {}", self.dt));
        }
        report
    }
}

/// Continuous-time plant; same matrices and invariants as
/// [`DiscreteSystem`] minus the sample period.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub cm: DMatrix<f64>,
    pub dm: DMatrix<f64>,
    pub hm: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub n: DMatrix<f64>,
}

impl ContinuousSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        g: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        h: DMatrix<f64>,
        cm: DMatrix<f64>,
        dm: DMatrix<f64>,
        hm: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        n: DMatrix<f64>,
    ) -> Result<Self> {
        let sys = Self {
            a,
            b,
            g,
            c,
            d,
            h,
            cm,
            dm,
            hm,
            q,
            r,
            n,
        };
        let report = sys.validate();
        if report.is_valid() {
            Ok(sys)
        } else {
            Err(Error::InvalidSystem(report.to_string()))
        }
    }

    pub fn nx(&self) -> usize {
        self.a.nrows()
    }

    pub fn validate(&self) -> ValidationReport {
        matrix_invariants(
            &self.a, &self.b, &self.g, &self.c, &self.d, &self.h, &self.cm, &self.dm, &self.hm,
            &self.q, &self.r, &self.n,
        )
    }
}

/// Free-function form of [`DiscreteSystem::validate`] for callers holding a
/// system they did not build through `new`.
pub fn validate(sys: &DiscreteSystem) -> ValidationReport {
    sys.validate()
}

#[allow(clippy::too_many_arguments)]
fn matrix_invariants(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    g: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
    h: &DMatrix<f64>,
    cm: &DMatrix<f64>,
    dm: &DMatrix<f64>,
    hm: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    n: &DMatrix<f64>,
) -> ValidationReport {
    let mut report = ValidationReport::default();

    let nx = a.nrows();
    let nu = b.ncols();
    let nw = g.ncols();
    let ny = c.nrows();
    let nz = cm.nrows();

    if a.ncols() != nx {
        report.push(format!(
            "dimension mismatch: A is {}x{}, must be square",
            a.nrows(),
            a.ncols()
        ));
    }
    if nx == 0 {
        report.push("state dimension nx must be at least 1".into());
    }
    if nw == 0 {
        report.push("process-noise dimension nw must be at least 1".into());
    }
    if ny == 0 {
        report.push("output dimension ny must be at least 1".into());
    }
    if nz == 0 {
        report.push("measurement dimension nz must be at least 1".into());
    }

    let mut check_shape = |name: &str, m: &DMatrix<f64>, rows: usize, cols: usize| {
        if m.shape() != (rows, cols) {
            report.push(format!(
                "dimension mismatch: {name} is {}x{}, expected {rows}x{cols}",
                m.nrows(),
                m.ncols()
            ));
        }
    };
    check_shape("B", b, nx, nu);
    check_shape("G", g, nx, nw);
    check_shape("C", c, ny, nx);
    check_shape("D", d, ny, nu);
    check_shape("H", h, ny, nw);
    check_shape("Cm", cm, nz, nx);
    check_shape("Dm", dm, nz, nu);
    check_shape("Hm", hm, nz, nw);
    check_shape("Q", q, nw, nw);
    check_shape("R", r, nz, nz);
    check_shape("N", n, nw, nz);

    let mut finite = |name: &str, m: &DMatrix<f64>| -> bool {
        let ok = m.iter().all(|v| v.is_finite());
        if !ok {
            report.push(format!("{name} contains non-finite entries"));
        }
        ok
    };
    for (name, m) in [
        ("A", a),
        ("B", b),
        ("G", g),
        ("C", c),
        ("D", d),
        ("H", h),
        ("Cm", cm),
        ("Dm", dm),
        ("Hm", hm),
    ] {
        finite(name, m);
    }
    // The spectral checks only make sense on finite blocks of the right
    // shape; issues in other matrices must not mask them.
    let q_ok = finite("Q", q) && q.shape() == (nw, nw);
    let r_ok = finite("R", r) && r.shape() == (nz, nz);
    let n_ok = finite("N", n) && n.shape() == (nw, nz);

    let sym_tol = 1e-9;
    for (name, m, ok) in [("Q", q, q_ok), ("R", r, r_ok)] {
        if !ok || m.nrows() == 0 {
            continue;
        }
        if (m - m.transpose()).amax() > sym_tol * (1.0 + m.amax()) {
            report.push(format!("{name} not symmetric"));
        }
        let min_eig = gaussian::min_symmetric_eigenvalue(m);
        if min_eig < -gaussian::PSD_TOL {
            report.push(format!("{name} not PSD (min eigenvalue {min_eig:.3e})"));
        }
    }

    // The pair (w, v) must admit a valid joint distribution: N is only
    // admissible if [[Q, N], [N', R]] stays PSD as a whole.
    if q_ok && r_ok && n_ok && nw + nz > 0 {
        let mut joint = DMatrix::zeros(nw + nz, nw + nz);
        joint.view_mut((0, 0), (nw, nw)).copy_from(q);
        joint.view_mut((0, nw), (nw, nz)).copy_from(n);
        joint.view_mut((nw, 0), (nz, nw)).copy_from(&n.transpose());
        joint.view_mut((nw, nw), (nz, nz)).copy_from(r);
        let joint_min = gaussian::min_symmetric_eigenvalue(&joint);
        if joint_min < -gaussian::PSD_TOL {
            report.push(format!(
                "joint noise covariance [[Q, N], [N', R]] not PSD (min eigenvalue {joint_min:.3e})"
            ));
        }
    }

    report
}

/// Produces the discrete-time model a filter runs at sample period `dt`.
///
/// Noise covariances are carried over unchanged: `w[n]`, `v[n]` are the
/// sampled disturbances with the stated second moments, not densities to be
/// rescaled.
pub fn discretize(
    sys: &ContinuousSystem,
    dt: f64,
    method: DiscretizationMethod,
) -> Result<DiscreteSystem> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "discretization step dt must be positive and finite, got {dt}"
        )));
    }
    let nx = sys.nx();
    let (a_d, b_d, g_d) = match method {
        DiscretizationMethod::Euler => (
            DMatrix::identity(nx, nx) + &sys.a * dt,
            &sys.b * dt,
            &sys.g * dt,
        ),
        DiscretizationMethod::ZeroOrderHold => {
            // exp([[A, I], [0, 0]] dt) = [[Ad, Phi], [0, I]] with
            // Phi = Int_0^dt exp(A s) ds, which handles singular A without a
            // special case.
            let mut aug = DMatrix::zeros(2 * nx, 2 * nx);
            aug.view_mut((0, 0), (nx, nx)).copy_from(&(&sys.a * dt));
            aug.view_mut((0, nx), (nx, nx))
                .copy_from(&(DMatrix::identity(nx, nx) * dt));
            let e = aug.exp();
            if e.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("matrix exponential".into()));
            }
            let a_d = e.view((0, 0), (nx, nx)).into_owned();
            let phi = e.view((0, nx), (nx, nx)).into_owned();
            (a_d, &phi * &sys.b, &phi * &sys.g)
        }
    };
    DiscreteSystem::new(
        a_d,
        b_d,
        g_d,
        sys.c.clone(),
        sys.d.clone(),
        sys.h.clone(),
        sys.cm.clone(),
        sys.dm.clone(),
        sys.hm.clone(),
        sys.q.clone(),
        sys.r.clone(),
        sys.n.clone(),
        dt,
    )
}

/// A system read from a definition file: either already discrete or a
/// continuous plant still awaiting discretization.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedSystem {
    Discrete(DiscreteSystem),
    Continuous {
        system: ContinuousSystem,
        /// `dt` given in the file, if any; a caller-supplied step overrides it.
        default_dt: Option<f64>,
    },
}

#[derive(Deserialize)]
struct SystemFileRaw {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B", default)]
    b: Option<Vec<Vec<f64>>>,
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D", default)]
    d: Option<Vec<Vec<f64>>>,
    #[serde(rename = "H")]
    h: Vec<Vec<f64>>,
    #[serde(rename = "Cm")]
    cm: Vec<Vec<f64>>,
    #[serde(rename = "Dm", default)]
    dm: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Hm")]
    hm: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    n: Vec<Vec<f64>>,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    continuous: bool,
}

fn rows_to_matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::SystemFile(format!(
                "{name}: row {i} has {} entries, expected {ncols} (rows must be equal length)",
                row.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Parses a JSON system definition.
///
/// Keys `A`, `G`, `C`, `H`, `Cm`, `Hm`, `Q`, `R`, `N` are required 2-D
/// row-major arrays; `B`, `D`, `Dm` default to zero matrices of the implied
/// shape when absent. `"continuous": true` marks the matrices as a
/// continuous-time plant (in which case `dt` is an optional default step);
/// otherwise `dt` is required.
pub fn parse_system_json(text: &str) -> Result<LoadedSystem> {
    let raw: SystemFileRaw = serde_json::from_str(text)?;

    let a = rows_to_matrix("A", &raw.a)?;
    let g = rows_to_matrix("G", &raw.g)?;
    let c = rows_to_matrix("C", &raw.c)?;
    let h = rows_to_matrix("H", &raw.h)?;
    let cm = rows_to_matrix("Cm", &raw.cm)?;
    let hm = rows_to_matrix("Hm", &raw.hm)?;
    let q = rows_to_matrix("Q", &raw.q)?;
    let r = rows_to_matrix("R", &raw.r)?;
    let n = rows_to_matrix("N", &raw.n)?;

    let b = raw.b.as_deref().map(|m| rows_to_matrix("B", m)).transpose()?;
    let d = raw.d.as_deref().map(|m| rows_to_matrix("D", m)).transpose()?;
    let dm = raw
        .dm
        .as_deref()
        .map(|m| rows_to_matrix("Dm", m))
        .transpose()?;

    // The input dimension comes from whichever input matrix is present;
    // systems with no inputs at all simply omit B, D, and Dm.
    let nu = b
        .as_ref()
        .map(DMatrix::ncols)
        .or_else(|| d.as_ref().map(DMatrix::ncols))
        .or_else(|| dm.as_ref().map(DMatrix::ncols))
        .unwrap_or(0);
    let b = b.unwrap_or_else(|| DMatrix::zeros(a.nrows(), nu));
    let d = d.unwrap_or_else(|| DMatrix::zeros(c.nrows(), nu));
    let dm = dm.unwrap_or_else(|| DMatrix::zeros(cm.nrows(), nu));

    if raw.continuous {
        let system = ContinuousSystem::new(a, b, g, c, d, h, cm, dm, hm, q, r, n)?;
        Ok(LoadedSystem::Continuous {
            system,
            default_dt: raw.dt,
        })
    } else {
        let dt = raw.dt.ok_or_else(|| {
            Error::SystemFile("discrete system requires \"dt\" (or set \"continuous\": true)".into())
        })?;
        let system = DiscreteSystem::new(a, b, g, c, d, h, cm, dm, hm, q, r, n, dt)?;
        Ok(LoadedSystem::Discrete(system))
    }
}

/// Reads and parses a JSON system definition file.
pub fn load_system(path: &Path) -> Result<LoadedSystem> {
    let text = std::fs::read_to_string(path)?;
    parse_system_json(&text)
}
