//! State and adjoint solves for the smooth-extension optimal-control
//! reformulation of the sign-changing transmission problem.
//!
//! For a control w on the non-source subdomain, the state pair (u, u2)
//! solves, in canonical orientation (source region carries the positive
//! coefficient),
//!
//! ```text
//! A u  = F1 + C w                 (global, coefficient eps~ > 0)
//! B u2 = -F2 - C^T u + K w        (subdomain, coefficient |eps_ctrl| > 0)
//! ```
//!
//! where `K` is the control metric (subdomain stiffness with coefficient
//! eps~) and the coupling `C w` is the scatter of `K w` into global
//! numbering, because subdomain basis functions are restrictions of global
//! ones on a conforming mesh. The cost is half the squared interface-mass
//! norm of the trace gap d = u2|_S - u|_S plus `lambda * w^T K w`; the
//! adjoint pair (g, g2) and the exact gradient K (g2 - R g + 2 lambda w)
//! follow from the discrete Lagrangian. All three factorizations happen once
//! in `prepare` and are reused by every subsequent solve.
//!
//! When the extension runs from subdomain 2 into subdomain 1, `prepare`
//! mirrors the problem (subdomain roles exchanged, coefficient magnitudes
//! taken, source negated) so the extended field always carries a positive
//! coefficient; the mirrored problem has the same solution, so no
//! translation is needed on output.

use crate::fem::{
    assemble_interface_mass, assemble_load, assemble_stiffness, build_space, projection_rhs,
    restrict_values, restriction_map, scatter_values, AnalyticField, DiscreteField, FeFunction,
    FemError, FunctionSpace, PiecewiseConstantCoefficient, QuadratureRule, RegionFilter,
    RestrictTarget, TraceTable, TriangleQuadrature,
};
use crate::geometry::Region;
use crate::linalg::{factorize_spd, LinalgError, SparseSymMatrix, SpdFactorization};
use crate::mesh::{validate, Mesh};
use std::fmt;
use std::sync::Arc;

/// Which subdomain's solution is smoothly extended to the whole domain. The
/// control then lives on the other subdomain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionSource {
    Subdomain1,
    Subdomain2,
}

/// The operators whose assembled forms must be SPD; named in factorization
/// errors because an SPD failure indicates a sign-convention bug upstream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    GlobalExtendedStiffness,
    SubdomainNegativeSideStiffness,
    ControlMetric,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::GlobalExtendedStiffness => write!(f, "global extended stiffness"),
            OperatorKind::SubdomainNegativeSideStiffness => {
                write!(f, "subdomain negative-side stiffness")
            }
            OperatorKind::ControlMetric => write!(f, "control metric"),
        }
    }
}

#[derive(Debug)]
pub enum TransmissionError {
    InvalidCoefficients {
        eps1: f64,
        eps2: f64,
        eps_tilde: f64,
    },
    NonConformingMesh {
        violations: Vec<String>,
    },
    NoBoundaryContact,
    Factorization {
        operator: OperatorKind,
        source: LinalgError,
    },
    Fem(FemError),
    Mesh(crate::mesh::MeshError),
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for TransmissionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransmissionError::InvalidCoefficients { eps1, eps2, eps_tilde } => write!(
                f,
                "invalid coefficients: need eps1 > 0, eps2 < 0, extension > 0; got ({eps1}, {eps2}, {eps_tilde})"
            ),
            TransmissionError::NonConformingMesh { violations } => {
                write!(f, "mesh does not conform to the interface: {violations:?}")
            }
            TransmissionError::NoBoundaryContact => write!(
                f,
                "the extension-target subdomain has no Dirichlet boundary edge; its space has no Poincare inequality"
            ),
            TransmissionError::Factorization { operator, source } => {
                write!(f, "factorization of the {operator} failed: {source}")
            }
            TransmissionError::Fem(e) => write!(f, "{e}"),
            TransmissionError::Mesh(e) => write!(f, "{e}"),
            TransmissionError::DimensionMismatch { expected, got } => {
                write!(f, "control length {got}, space has {expected} unknowns")
            }
        }
    }
}

impl std::error::Error for TransmissionError {}

impl From<FemError> for TransmissionError {
    fn from(e: FemError) -> Self {
        TransmissionError::Fem(e)
    }
}

/// A sign-changing transmission problem: coefficients, source, and the
/// direction of the smooth extension.
#[derive(Clone, Debug)]
pub struct TransmissionProblem {
    eps1: f64,
    eps2: f64,
    eps_tilde: f64,
    source: AnalyticField,
    extension_source: ExtensionSource,
}

impl TransmissionProblem {
    /// `eps1 > 0` on region 1, `eps2 < 0` on region 2. The extension
    /// coefficient defaults to the magnitude of the source-side coefficient.
    pub fn new(
        eps1: f64,
        eps2: f64,
        source: AnalyticField,
        extension_source: ExtensionSource,
    ) -> Result<TransmissionProblem, TransmissionError> {
        let eps_tilde = match extension_source {
            ExtensionSource::Subdomain1 => eps1.abs(),
            ExtensionSource::Subdomain2 => eps2.abs(),
        };
        Self::with_extension_coefficient(eps1, eps2, eps_tilde, source, extension_source)
    }

    pub fn with_extension_coefficient(
        eps1: f64,
        eps2: f64,
        eps_tilde: f64,
        source: AnalyticField,
        extension_source: ExtensionSource,
    ) -> Result<TransmissionProblem, TransmissionError> {
        if !(eps1 > 0.0) || !(eps2 < 0.0) || !(eps_tilde > 0.0) {
            return Err(TransmissionError::InvalidCoefficients {
                eps1,
                eps2,
                eps_tilde,
            });
        }
        Ok(TransmissionProblem {
            eps1,
            eps2,
            eps_tilde,
            source,
            extension_source,
        })
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    pub fn eps_tilde(&self) -> f64 {
        self.eps_tilde
    }

    pub fn extension_source(&self) -> ExtensionSource {
        self.extension_source
    }
}

/// Coefficient vector of a control in the subdomain space.
#[derive(Clone, Debug, PartialEq)]
pub struct Control(pub Vec<f64>);

impl Control {
    pub fn zeros(n: usize) -> Control {
        Control(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct StatePair {
    pub global: FeFunction,
    pub sub: FeFunction,
}

#[derive(Clone, Debug)]
pub struct AdjointPair {
    pub global: FeFunction,
    pub sub: FeFunction,
}

/// Everything assembled and factorized once per (problem, mesh) pair.
pub struct DiscreteOperators {
    mesh: Arc<Mesh>,
    global_space: Arc<FunctionSpace>,
    sub_space: Arc<FunctionSpace>,
    restriction: Vec<RestrictTarget>,
    /// canonical region of the extended (source) side
    source_region: Region,
    /// canonical region of the control side
    control_region: Region,
    /// +1 when the problem is already canonical, -1 when mirrored
    sign: f64,
    /// coefficient of the extended field on the control region
    eps_tilde: f64,
    /// factorized global stiffness with the extended coefficient
    a: SpdFactorization,
    /// factorized subdomain stiffness with |eps| of the control side
    b: SpdFactorization,
    /// factorized control metric: subdomain stiffness with eps_tilde
    k: SpdFactorization,
    /// global-space stiffness over the control region with eps_tilde
    /// (the coupling block C via lift/restrict)
    a2_tilde: SparseSymMatrix,
    /// global-space stiffness over the source region with its |eps|
    a1_source: SparseSymMatrix,
    /// global-space stiffness over the control region with its |eps|
    a2_ctrl: SparseSymMatrix,
    mass: SparseSymMatrix,
    trace: TraceTable,
    /// canonical load on the global space (source region)
    f1: Vec<f64>,
    /// canonical load on the subdomain space (control region)
    f2: Vec<f64>,
    h: f64,
    quadrature: TriangleQuadrature,
}

/// Assembles and factorizes everything the optimization loop needs. The mesh
/// must conform to the interface and the control-side subdomain must touch
/// the outer boundary.
pub fn prepare(
    problem: &TransmissionProblem,
    mesh: Arc<Mesh>,
    quadrature: QuadratureRule,
) -> Result<DiscreteOperators, TransmissionError> {
    let report = validate(&mesh).map_err(TransmissionError::Mesh)?;
    if !report.conforming {
        return Err(TransmissionError::NonConformingMesh {
            violations: report.violations,
        });
    }

    // canonical orientation: the source region keeps a positive coefficient
    let (source_region, sign) = match problem.extension_source {
        ExtensionSource::Subdomain1 => (Region::One, 1.0),
        ExtensionSource::Subdomain2 => (Region::Two, -1.0),
    };
    let control_region = source_region.other();
    let eps_source = match source_region {
        Region::One => problem.eps1.abs(),
        Region::Two => problem.eps2.abs(),
    };
    let eps_ctrl = match control_region {
        Region::One => problem.eps1.abs(),
        Region::Two => problem.eps2.abs(),
    };

    // the control-side space needs a Dirichlet part away from the interface
    let owns_boundary = {
        let mut region_of_edge = std::collections::HashMap::new();
        for t in mesh.triangles() {
            let [a, b, c] = t.vertices;
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let key = if u < v { (u, v) } else { (v, u) };
                region_of_edge.insert(key, t.region);
            }
        }
        mesh.boundary_edges().iter().any(|e| {
            let [a, b] = e.vertices;
            let key = if a < b { (a, b) } else { (b, a) };
            region_of_edge.get(&key) == Some(&control_region)
        })
    };
    if !owns_boundary {
        return Err(TransmissionError::NoBoundaryContact);
    }

    let global_space = Arc::new(build_space(&mesh, crate::fem::DomainSelector::Global, 1)?);
    let sub_space = Arc::new(build_space(
        &mesh,
        crate::fem::DomainSelector::Subdomain(control_region),
        1,
    )?);
    let restriction = restriction_map(&global_space, &sub_space)?;

    let pick = |on_source: f64, on_ctrl: f64| -> Result<PiecewiseConstantCoefficient, FemError> {
        match source_region {
            Region::One => PiecewiseConstantCoefficient::new(on_source, on_ctrl),
            Region::Two => PiecewiseConstantCoefficient::new(on_ctrl, on_source),
        }
    };
    let extended = pick(eps_source, problem.eps_tilde)?;
    let metric = pick(problem.eps_tilde, problem.eps_tilde)?;
    let ctrl_abs = pick(eps_ctrl, eps_ctrl)?;

    let fact = |m: &SparseSymMatrix,
                operator: OperatorKind|
     -> Result<SpdFactorization, TransmissionError> {
        factorize_spd(m).map_err(|source| TransmissionError::Factorization { operator, source })
    };
    let a_raw = assemble_stiffness(&global_space, &extended, RegionFilter::All)?;
    let a = fact(&a_raw, OperatorKind::GlobalExtendedStiffness)?;
    let b_raw = assemble_stiffness(&sub_space, &ctrl_abs, RegionFilter::Only(control_region))?;
    let b = fact(&b_raw, OperatorKind::SubdomainNegativeSideStiffness)?;
    let k_raw = assemble_stiffness(&sub_space, &metric, RegionFilter::Only(control_region))?;
    let k = fact(&k_raw, OperatorKind::ControlMetric)?;

    let a2_tilde = assemble_stiffness(&global_space, &metric, RegionFilter::Only(control_region))?;
    let a1_source = assemble_stiffness(
        &global_space,
        &pick(eps_source, eps_source)?,
        RegionFilter::Only(source_region),
    )?;
    let a2_ctrl = assemble_stiffness(&global_space, &ctrl_abs, RegionFilter::Only(control_region))?;

    let trace = TraceTable::from_mesh(&mesh)?;
    let mass = assemble_interface_mass(&mesh, &trace)?;

    let quad = quadrature.build();
    // mirrored problems solve -div((-eps) grad u) = -f, which has the same
    // solution; region labels stay those of the mesh, only the roles flip
    let canonical_source = if sign < 0.0 {
        problem.source.negated()
    } else {
        problem.source.clone()
    };
    let f1 = assemble_load(
        &global_space,
        &canonical_source,
        RegionFilter::Only(source_region),
        &quad,
    );
    let f2 = assemble_load(
        &sub_space,
        &canonical_source,
        RegionFilter::Only(control_region),
        &quad,
    );

    Ok(DiscreteOperators {
        h: mesh.meshsize(),
        mesh,
        global_space,
        sub_space,
        restriction,
        source_region,
        control_region,
        sign,
        eps_tilde: problem.eps_tilde,
        a,
        b,
        k,
        a2_tilde,
        a1_source,
        a2_ctrl,
        mass,
        trace,
        f1,
        f2,
        quadrature: quad,
    })
}

impl DiscreteOperators {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn meshsize(&self) -> f64 {
        self.h
    }

    pub fn control_dimension(&self) -> usize {
        self.sub_space.num_unknowns()
    }

    pub fn global_space(&self) -> &Arc<FunctionSpace> {
        &self.global_space
    }

    pub fn sub_space(&self) -> &Arc<FunctionSpace> {
        &self.sub_space
    }

    pub fn control_region(&self) -> Region {
        self.control_region
    }

    pub fn source_region(&self) -> Region {
        self.source_region
    }

    pub fn control_metric(&self) -> &SparseSymMatrix {
        self.k.matrix()
    }

    pub fn trace(&self) -> &TraceTable {
        &self.trace
    }

    fn check_control(&self, w: &Control) -> Result<(), TransmissionError> {
        if w.len() != self.control_dimension() {
            return Err(TransmissionError::DimensionMismatch {
                expected: self.control_dimension(),
                got: w.len(),
            });
        }
        Ok(())
    }

    /// C^T u in subdomain numbering.
    fn coupling_transpose(&self, u_global: &[f64]) -> Vec<f64> {
        let au = self.a2_tilde.matvec(u_global).expect("dimension");
        restrict_values(&self.restriction, &au)
    }

    /// Solves the two state systems for the coupling vector r_w (= K w for a
    /// discrete control, or the quadrature coupling load of an analytic one).
    fn solve_state_from_coupling(&self, r_w: &[f64]) -> Result<StatePair, TransmissionError> {
        let n_g = self.global_space.num_unknowns();
        let mut rhs_g = scatter_values(&self.restriction, r_w, n_g);
        for (r, f) in rhs_g.iter_mut().zip(&self.f1) {
            *r += f;
        }
        let u = self.a.solve(&rhs_g).map_err(|e| self.solve_err(e))?;

        let ctu = self.coupling_transpose(&u);
        let rhs_s: Vec<f64> = r_w
            .iter()
            .zip(&ctu)
            .zip(&self.f2)
            .map(|((rw, c), f)| rw - c - f)
            .collect();
        let u2 = self.b.solve(&rhs_s).map_err(|e| self.solve_err(e))?;

        Ok(StatePair {
            global: FeFunction::new(self.global_space.clone(), u)?,
            sub: FeFunction::new(self.sub_space.clone(), u2)?,
        })
    }

    fn solve_err(&self, e: LinalgError) -> TransmissionError {
        TransmissionError::Fem(FemError::Linalg(e))
    }

    /// State pair for a discrete control (Eq.-style triangular solve: global
    /// field first, then the subdomain field).
    pub fn solve_state(&self, w: &Control) -> Result<StatePair, TransmissionError> {
        self.check_control(w)?;
        let kw = self.k.matrix().matvec(&w.0).expect("dimension");
        self.solve_state_from_coupling(&kw)
    }

    /// State pair for an analytic control, coupling load assembled by
    /// quadrature. Identical (to solver precision) to solving with the
    /// energy projection of the field, which is the discrete statement of
    /// the projection identity.
    pub fn solve_state_analytic(&self, w: &AnalyticField) -> Result<StatePair, TransmissionError> {
        let r_w = projection_rhs(&self.sub_space, w, self.eps_tilde, &self.quadrature);
        self.solve_state_from_coupling(&r_w)
    }

    /// Energy projection of an analytic control onto the control space,
    /// reusing the factorized metric.
    pub fn project_control(&self, w: &AnalyticField) -> Result<Control, TransmissionError> {
        let rhs = projection_rhs(&self.sub_space, w, self.eps_tilde, &self.quadrature);
        Ok(Control(self.k.solve(&rhs).map_err(|e| self.solve_err(e))?))
    }

    /// Interface trace gap d = u2|_S - u|_S at the interface vertices.
    pub fn trace_gap(&self, state: &StatePair) -> Vec<f64> {
        let tu = self.trace.values_of(&state.global);
        let t2 = self.trace.values_of(&state.sub);
        t2.iter().zip(&tu).map(|(a, b)| a - b).collect()
    }

    /// Half the squared interface-mass norm of the trace gap.
    pub fn misfit(&self, state: &StatePair) -> f64 {
        let d = self.trace_gap(state);
        0.5 * self.mass.quadratic_form(&d)
    }

    /// Regularized cost: misfit + lambda * w^T K w.
    pub fn cost(&self, state: &StatePair, w: &Control, lambda: f64) -> f64 {
        assert!(lambda > 0.0, "cost requires lambda > 0");
        self.misfit(state) + lambda * self.k.matrix().quadratic_form(&w.0)
    }

    /// Adjoint pair. The subdomain equation is self-contained and solved
    /// first: B g2 = Md scattered to the subdomain; then the global one:
    /// A g = C g2 + Md scattered globally.
    pub fn solve_adjoint(&self, state: &StatePair) -> Result<AdjointPair, TransmissionError> {
        let d = self.trace_gap(state);
        let md = self.mass.matvec(&d).expect("dimension");

        let rhs_s = self.trace.scatter_into_space(&md, &self.sub_space);
        let g2 = self.b.solve(&rhs_s).map_err(|e| self.solve_err(e))?;

        let kg2 = self.k.matrix().matvec(&g2).expect("dimension");
        let mut rhs_g = scatter_values(&self.restriction, &kg2, self.global_space.num_unknowns());
        let md_g = self.trace.scatter_into_space(&md, &self.global_space);
        for (r, m) in rhs_g.iter_mut().zip(&md_g) {
            *r += m;
        }
        let g = self.a.solve(&rhs_g).map_err(|e| self.solve_err(e))?;

        Ok(AdjointPair {
            global: FeFunction::new(self.global_space.clone(), g)?,
            sub: FeFunction::new(self.sub_space.clone(), g2)?,
        })
    }

    /// Euclidean gradient of the regularized cost with respect to the
    /// control coefficients: K (g2 - R g + 2 lambda w).
    pub fn gradient(&self, w: &Control, adjoint: &AdjointPair, lambda: f64) -> Vec<f64> {
        let rg = restrict_values(&self.restriction, adjoint.global.coeffs());
        let v: Vec<f64> = adjoint
            .sub
            .coeffs()
            .iter()
            .zip(&rg)
            .zip(&w.0)
            .map(|((g2, g), wi)| g2 - g + 2.0 * lambda * wi)
            .collect();
        self.k.matrix().matvec(&v).expect("dimension")
    }

    /// Exact Hessian of the (quadratic) cost applied to a direction: one
    /// linearized state solve with zero source, one adjoint solve, plus the
    /// 2 lambda metric term.
    pub fn hessvec(&self, direction: &[f64], lambda: f64) -> Result<Vec<f64>, TransmissionError> {
        let n_g = self.global_space.num_unknowns();
        let kv = self.k.matrix().matvec(direction).expect("dimension");

        let rhs_g = scatter_values(&self.restriction, &kv, n_g);
        let du = self.a.solve(&rhs_g).map_err(|e| self.solve_err(e))?;
        let ctdu = self.coupling_transpose(&du);
        let rhs_s: Vec<f64> = kv.iter().zip(&ctdu).map(|(k, c)| k - c).collect();
        let du2 = self.b.solve(&rhs_s).map_err(|e| self.solve_err(e))?;

        let tu: Vec<f64> = self
            .trace
            .vertices()
            .iter()
            .map(|&v| match self.global_space.vertex_class(v) {
                crate::fem::DofClass::Free(i) => du[i],
                _ => 0.0,
            })
            .collect();
        let t2: Vec<f64> = self
            .trace
            .vertices()
            .iter()
            .map(|&v| match self.sub_space.vertex_class(v) {
                crate::fem::DofClass::Free(i) => du2[i],
                _ => 0.0,
            })
            .collect();
        let dd: Vec<f64> = t2.iter().zip(&tu).map(|(a, b)| a - b).collect();
        let mdd = self.mass.matvec(&dd).expect("dimension");

        let rhs_s2 = self.trace.scatter_into_space(&mdd, &self.sub_space);
        let dg2 = self.b.solve(&rhs_s2).map_err(|e| self.solve_err(e))?;
        let kdg2 = self.k.matrix().matvec(&dg2).expect("dimension");
        let mut rhs_g2 = scatter_values(&self.restriction, &kdg2, n_g);
        let mdd_g = self.trace.scatter_into_space(&mdd, &self.global_space);
        for (r, m) in rhs_g2.iter_mut().zip(&mdd_g) {
            *r += m;
        }
        let dg = self.a.solve(&rhs_g2).map_err(|e| self.solve_err(e))?;

        let rdg = restrict_values(&self.restriction, &dg);
        let v: Vec<f64> = dg2
            .iter()
            .zip(&rdg)
            .zip(direction)
            .map(|((g2, g), di)| g2 - g + 2.0 * lambda * di)
            .collect();
        Ok(self.k.matrix().matvec(&v).expect("dimension"))
    }

    /// Discrete flux-balance residual: the composite weak form
    /// eps1 (grad u1, grad v) + eps2 (grad u2, grad v) - (f, v), which
    /// vanishes identically for every control. Returns the max absolute
    /// entry over global test functions.
    pub fn flux_balance_residual(&self, state: &StatePair) -> f64 {
        let a1u = self
            .a1_source
            .matvec(state.global.coeffs())
            .expect("dimension");
        let u2_lifted = scatter_values(
            &self.restriction,
            state.sub.coeffs(),
            self.global_space.num_unknowns(),
        );
        let a2u2 = self.a2_ctrl.matvec(&u2_lifted).expect("dimension");
        let f2_lifted = scatter_values(
            &self.restriction,
            &self.f2,
            self.global_space.num_unknowns(),
        );
        a1u.iter()
            .zip(&a2u2)
            .zip(self.f1.iter().zip(&f2_lifted))
            .map(|((a1, a2), (f1, f2))| (a1 - a2 - f1 - f2).abs())
            .fold(0.0f64, f64::max)
    }

    /// Scale of the canonical load, for relative residual checks.
    pub fn load_scale(&self) -> f64 {
        self.f1
            .iter()
            .chain(&self.f2)
            .map(|f| f.abs())
            .fold(0.0f64, f64::max)
            .max(1e-300)
    }

    /// Energy norm of a control: sqrt(w^T K w).
    pub fn control_norm(&self, w: &Control) -> f64 {
        self.k.matrix().quadratic_form(&w.0).max(0.0).sqrt()
    }

    /// Solves K x = rhs with the factorized control metric (the
    /// preconditioner of the optimization loop).
    pub fn metric_solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.k.solve(rhs).expect("dimension")
    }

    /// The composite discrete field: the extended solution on the source
    /// region, the subdomain solution on the control region.
    pub fn composite<'a>(&self, state: &'a StatePair) -> DiscreteField<'a> {
        DiscreteField::Composite {
            global: &state.global,
            sub: &state.sub,
            sub_region: self.control_region,
        }
    }

    /// Residual norms of the two state systems for a given control, relative
    /// to their right-hand sides; diagnostic used by the structural tests.
    pub fn state_residuals(&self, w: &Control, state: &StatePair) -> (f64, f64) {
        let kw = self.k.matrix().matvec(&w.0).expect("dimension");
        let n_g = self.global_space.num_unknowns();
        let mut rhs_g = scatter_values(&self.restriction, &kw, n_g);
        for (r, f) in rhs_g.iter_mut().zip(&self.f1) {
            *r += f;
        }
        let au = self
            .a
            .matrix()
            .matvec(state.global.coeffs())
            .expect("dimension");
        let r_g = rel_residual(&au, &rhs_g);

        let ctu = self.coupling_transpose(state.global.coeffs());
        let rhs_s: Vec<f64> = kw
            .iter()
            .zip(&ctu)
            .zip(&self.f2)
            .map(|((k, c), f)| k - c - f)
            .collect();
        let bu2 = self
            .b
            .matrix()
            .matvec(state.sub.coeffs())
            .expect("dimension");
        (r_g, rel_residual(&bu2, &rhs_s))
    }

    /// Residual norms of the two adjoint systems, relative to their
    /// right-hand sides.
    pub fn adjoint_residuals(&self, state: &StatePair, adjoint: &AdjointPair) -> (f64, f64) {
        let d = self.trace_gap(state);
        let md = self.mass.matvec(&d).expect("dimension");

        let rhs_s = self.trace.scatter_into_space(&md, &self.sub_space);
        let bg2 = self
            .b
            .matrix()
            .matvec(adjoint.sub.coeffs())
            .expect("dimension");
        let r_s = rel_residual(&bg2, &rhs_s);

        let kg2 = self
            .k
            .matrix()
            .matvec(adjoint.sub.coeffs())
            .expect("dimension");
        let mut rhs_g = scatter_values(&self.restriction, &kg2, self.global_space.num_unknowns());
        let md_g = self.trace.scatter_into_space(&md, &self.global_space);
        for (r, m) in rhs_g.iter_mut().zip(&md_g) {
            *r += m;
        }
        let ag = self
            .a
            .matrix()
            .matvec(adjoint.global.coeffs())
            .expect("dimension");
        (rel_residual(&ag, &rhs_g), r_s)
    }

    /// Sign of the canonicalization (+1 canonical, -1 mirrored); exposed for
    /// diagnostics only.
    pub fn orientation_sign(&self) -> f64 {
        self.sign
    }
}

fn rel_residual(lhs: &[f64], rhs: &[f64]) -> f64 {
    let num: f64 = lhs
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den = crate::linalg::norm(rhs).max(1e-300);
    num / den
}

#[cfg(test)]
mod tests;
