//! The verification suites behind each CLI subcommand. Every suite produces
//! plain records; thresholds come from the config with built-in defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use smallvec::SmallVec;

use polycauchy::clifford::{Multivector, Vector};
use polycauchy::error::Error;
use polycauchy::kernels::KernelFamily;
use polycauchy::multiindex::{dirac_power_expansion, enumerate_indices, MultiIndex};
use polycauchy::operators::OperatorContext;
use polycauchy::polynomial::PolyField;
use polycauchy::rng::SplitMix64;
use polycauchy::surface::{Side, SurfaceMesh};
use polycauchy::whitney::{Jet, LipschitzData, WhitneyExtension};

use crate::config::{Config, ConfigError};
use crate::report::{Record, Report};

pub const COMMANDS: &[&str] = &[
    "kernels",
    "involution",
    "jump",
    "decompose",
    "rh",
    "whitney",
    "all",
];

/// Run one subcommand (or `all`) and assemble the report.
pub fn run(command: &str, cfg: &Config) -> Result<Report, ConfigError> {
    let records = match command {
        "kernels" => kernels_suite(cfg)?,
        "involution" => involution_suite(cfg)?,
        "jump" => jump_suite(cfg)?,
        "decompose" => decompose_suite(cfg)?,
        "rh" => rh_suite(cfg)?,
        "whitney" => whitney_suite(cfg)?,
        "all" => {
            let mut all = kernels_suite(cfg)?;
            all.extend(involution_suite(cfg)?);
            all.extend(jump_suite(cfg)?);
            all.extend(decompose_suite(cfg)?);
            all.extend(rh_suite(cfg)?);
            all.extend(whitney_suite(cfg)?);
            all
        }
        other => return Err(ConfigError(format!("unknown command `{other}`"))),
    };
    Ok(Report::new(command, cfg, records))
}

fn lift(e: Error) -> ConfigError {
    ConfigError(format!("{e}"))
}

// ----- shared construction ----------------------------------------------

fn mesh_for(cfg: &Config, level: usize) -> Result<Arc<SurfaceMesh<f64>>, ConfigError> {
    if let Some(path) = &cfg.mesh {
        let file = std::fs::File::open(path)
            .map_err(|e| ConfigError(format!("mesh file {}: {e}", path.display())))?;
        return Ok(Arc::new(
            SurfaceMesh::import(std::io::BufReader::new(file)).map_err(lift)?,
        ));
    }
    Ok(Arc::new(
        SurfaceMesh::sphere(cfg.m, cfg.radius, level).map_err(lift)?,
    ))
}

fn context(cfg: &Config, level: usize) -> Result<OperatorContext<f64>, ConfigError> {
    OperatorContext::new(mesh_for(cfg, level)?, cfg.k, cfg.alpha).map_err(lift)
}

/// A reproducible random polynomial with multivector coefficients.
pub fn random_poly(m: usize, deg: usize, seed: u64) -> PolyField<f64> {
    let mut rng = SplitMix64::new(seed);
    let mut p = PolyField::zero(m);
    for j in enumerate_indices(m, deg) {
        if rng.next_f64() < 0.4 {
            continue;
        }
        let mut c = Multivector::zero(m);
        for mask in 0..(1usize << m) {
            *c.coeff_mut(mask) = rng.range(-0.5, 0.5);
        }
        p.add_term(j, c);
    }
    if p.is_zero() {
        p.add_term(MultiIndex::zeros(m), Multivector::scalar(m, 1.0));
    }
    p
}

/// Smooth non-polynomial data c*sin(a.x + phi) with the exact derivative jet
/// d^j f = (prod a_i^{j_i}) c sin(a.x + phi + |j| pi/2).
pub fn trig_data(
    mesh: Arc<SurfaceMesh<f64>>,
    k: usize,
    alpha: f64,
    seed: u64,
) -> LipschitzData<f64> {
    let m = mesh.dim();
    let mut rng = SplitMix64::new(seed ^ 0x7216);
    let a: Vec<f64> = (0..m).map(|_| rng.range(-1.2, 1.2)).collect();
    let phi = rng.range(0.0, 2.0 * PI);
    let mut c = Multivector::zero(m);
    for mask in 0..(1usize << m) {
        *c.coeff_mut(mask) = rng.range(-0.5, 0.5);
    }
    let jet: Jet<f64> = Arc::new(move |x: &Vector<f64>, j: &MultiIndex| {
        let mut arg = phi + j.order() as f64 * PI / 2.0;
        let mut amp = 1.0;
        for i in 0..x.dim() {
            arg += a[i] * x[i];
            amp *= a[i].powi(j.get(i) as i32);
        }
        c.scale(amp * arg.sin())
    });
    LipschitzData::from_jet(mesh, k, alpha, jet)
}

fn make_data(cfg: &Config, mesh: Arc<SurfaceMesh<f64>>) -> Result<LipschitzData<f64>, ConfigError> {
    match cfg.generator.as_str() {
        "polynomial" => {
            let p = random_poly(cfg.m, 3, cfg.seed);
            Ok(LipschitzData::from_poly(mesh, cfg.k, cfg.alpha, &p))
        }
        "smooth-trig" => Ok(trig_data(mesh, cfg.k, cfg.alpha, cfg.seed)),
        "file" => {
            let path = cfg.data.as_ref().expect("validated");
            let file = std::fs::File::open(path)
                .map_err(|e| ConfigError(format!("data file {}: {e}", path.display())))?;
            LipschitzData::import(mesh, cfg.k, cfg.alpha, std::io::BufReader::new(file))
                .map_err(lift)
        }
        other => Err(ConfigError(format!("unknown generator `{other}`"))),
    }
}

/// Default jump-residual tolerance: 1e-2 at the reference level 16, relaxed
/// quadratically on coarser meshes (the boundary-limit error is dominated by
/// the O(h^2) quadrature term away from the finest level).
fn jump_default(level: usize) -> f64 {
    let scale = (16.0 / level as f64).max(1.0);
    1e-2 * scale * scale
}

pub fn sample_nodes(len: usize, want: usize) -> Vec<usize> {
    let want = want.min(len).max(1);
    (0..want).map(|i| i * len / want).collect()
}

pub fn data_error(a: &LipschitzData<f64>, b: &LipschitzData<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for pos in 0..a.indices().len() {
        for node in 0..a.mesh().len() {
            worst = worst.max((a.value(pos, node) - b.value(pos, node)).norm());
        }
    }
    worst
}

/// sup over sampled nodes and all |j| <= k of ||S_k(S_k f)^(j) - f^(j)||.
pub fn nested_involution_error(
    ctx: &OperatorContext<f64>,
    data: &LipschitzData<f64>,
    samples: usize,
) -> Result<f64, ConfigError> {
    let s1 = ctx.apply_sk(data).map_err(lift)?;
    let mut worst: f64 = 0.0;
    for node in sample_nodes(ctx.mesh().len(), samples) {
        for (pos, j) in data.indices().iter().enumerate() {
            let got = ctx.singular_skj(&s1, j, node).map_err(lift)?;
            worst = worst.max((&got - data.value(pos, node)).norm());
        }
    }
    Ok(worst)
}

// ----- kernels -----------------------------------------------------------

fn kernels_suite(cfg: &Config) -> Result<Vec<Record>, ConfigError> {
    let mut records = Vec::new();
    let fam = match KernelFamily::<f64>::build(cfg.m, cfg.k) {
        Ok(fam) => fam,
        Err(Error::UnsupportedOrder { .. }) => {
            // logarithmic branch: rejection is the correct behavior exactly
            // when m is even and the requested order reaches it
            let expected = cfg.m % 2 == 0 && cfg.k + 1 >= cfg.m;
            records.push(Record::verdict(
                "kernel_build",
                0,
                "unsupported_order_expected",
                1.0,
                expected,
            ));
            return Ok(records);
        }
        Err(e) => return Err(lift(e)),
    };

    let rec = fam.validate_recursion(200, cfg.seed);
    records.push(Record::bounded(
        "kernel_monogenicity",
        0,
        "max_rel_residual",
        rec.monogenicity,
        cfg.tol("kernel_monogenicity", 1e-6),
    ));
    if fam.max_order() > 0 {
        records.push(Record::bounded(
            "kernel_recursion",
            0,
            "max_rel_residual",
            rec.max_residual(),
            cfg.tol("kernel_recursion", 1e-6),
        ));
    } else {
        records.push(Record::verdict(
            "kernel_recursion",
            0,
            "no_orders_to_check",
            0.0,
            true,
        ));
    }

    // exact homogeneity of each order
    let mut rng = SplitMix64::new(cfg.seed ^ 0x4a11);
    let mut homog: f64 = 0.0;
    for _ in 0..50 {
        let comps: SmallVec<[f64; 4]> = (0..cfg.m).map(|_| rng.range(-1.0, 1.0)).collect();
        let x = Vector::new(comps);
        if x.norm() < 0.2 {
            continue;
        }
        let lam = rng.range(0.3, 3.0);
        for u in 0..=fam.max_order() {
            let base = fam.eval(u, &x).map_err(lift)?;
            let scaled = fam.eval(u, &x.scale(lam)).map_err(lift)?;
            let factor = lam.powi(u as i32 + 1 - cfg.m as i32);
            let want = base.scale(factor);
            homog = homog.max((&scaled - &want).norm() / (1.0 + want.norm()));
        }
    }
    records.push(Record::bounded(
        "kernel_homogeneity",
        0,
        "max_rel_error",
        homog,
        cfg.tol("kernel_homogeneity", 1e-12),
    ));

    // analytic derivatives vs central differences at |x| ~ 1
    let mut deriv: f64 = 0.0;
    let h = 1e-5;
    for u in 0..=fam.max_order() {
        for i in 0..cfg.m {
            let j = MultiIndex::unit(cfg.m, i);
            for trial in 0..20 {
                let mut comps: Vec<f64> = (0..cfg.m)
                    .map(|d| ((trial * 7 + d * 3 + 1) as f64).sin())
                    .collect();
                let norm: f64 = comps.iter().map(|c| c * c).sum::<f64>().sqrt();
                comps.iter_mut().for_each(|c| *c /= norm);
                let x = Vector::new(comps.clone());
                let mut xp = comps.clone();
                let mut xm = comps;
                xp[i] += h;
                xm[i] -= h;
                let fd = (&fam.eval(u, &Vector::new(xp)).map_err(lift)?
                    - &fam.eval(u, &Vector::new(xm)).map_err(lift)?)
                    .scale(0.5 / h);
                let exact = fam.eval_deriv(u, &j, &x).map_err(lift)?;
                deriv = deriv.max((&fd - &exact).norm() / (1.0 + exact.norm()));
            }
        }
    }
    records.push(Record::bounded(
        "kernel_derivative",
        0,
        "max_rel_fd_error",
        deriv,
        cfg.tol("kernel_derivative", 1e-6),
    ));
    Ok(records)
}

// ----- involution --------------------------------------------------------

fn involution_suite(cfg: &Config) -> Result<Vec<Record>, ConfigError> {
    let mut records = Vec::new();
    let mut per_level = Vec::new();
    for &level in &cfg.levels {
        let ctx = context(cfg, level)?;
        let data = make_data(cfg, ctx.mesh().clone())?;
        let err = nested_involution_error(&ctx, &data, 2)?;
        per_level.push(err);
        records.push(Record::bounded(
            "involution",
            level,
            "sup_component_error",
            err,
            cfg.tol("involution", 5e-2),
        ));
    }
    if per_level.len() >= 2 {
        let first = per_level[0].max(1e-14);
        let last = per_level[per_level.len() - 1];
        records.push(Record::bounded(
            "involution_decay",
            *cfg.levels.last().unwrap(),
            "final_over_initial",
            last / first,
            cfg.tol("involution_decay", 1.1),
        ));
    }

    let level = *cfg.levels.last().unwrap();
    let ctx = context(cfg, level)?;

    // zero data maps to exactly zero
    let zero = LipschitzData::<f64>::zero(ctx.mesh().clone(), cfg.k, cfg.alpha);
    let szero = ctx.apply_sk(&zero).map_err(lift)?;
    records.push(Record::bounded(
        "involution_zero",
        level,
        "sup_norm",
        szero.max_norm(),
        0.0,
    ));

    // projection algebra and the Plemelj-Privalov sanity figure
    let data = make_data(cfg, ctx.mesh().clone())?;
    let s = ctx.apply_sk(&data).map_err(lift)?;
    let pplus = data.linear_comb(0.5, &s, 0.5).map_err(lift)?;
    let pminus = data.linear_comb(0.5, &s, -0.5).map_err(lift)?;
    let recon = pplus.linear_comb(1.0, &pminus, 1.0).map_err(lift)?;
    records.push(Record::bounded(
        "projection_identity",
        level,
        "sup_reconstruction_error",
        data_error(&recon, &data),
        cfg.tol("projection_identity", 1e-12),
    ));

    let m_in = data.validate().m_est.max(1e-14);
    let m_out = s.validate().m_est;
    records.push(Record::bounded(
        "plemelj_privalov",
        level,
        "lipschitz_constant_ratio",
        m_out / m_in,
        cfg.tol("plemelj_privalov", 100.0),
    ));
    Ok(records)
}

// ----- jump relations ----------------------------------------------------

fn jump_suite(cfg: &Config) -> Result<Vec<Record>, ConfigError> {
    let mut records = Vec::new();
    let level = *cfg.levels.last().unwrap();
    let ctx = context(cfg, level)?;
    let data = make_data(cfg, ctx.mesh().clone())?;
    let zero_index = MultiIndex::zeros(cfg.m);
    let pos0 = data.position(&zero_index).map_err(lift)?;

    let mut diff_resid: f64 = 0.0;
    let mut sum_resid: f64 = 0.0;
    let mut contracting = true;
    for node in sample_nodes(ctx.mesh().len(), 20) {
        let plus = ctx
            .boundary_limit(&data, 0, node, Side::Interior)
            .map_err(lift)?;
        let minus = ctx
            .boundary_limit(&data, 0, node, Side::Exterior)
            .map_err(lift)?;
        contracting &= plus.contracting && minus.contracting;
        let f0 = data.value(pos0, node);
        let s0 = ctx.singular_skj(&data, &zero_index, node).map_err(lift)?;
        diff_resid = diff_resid.max((&(&plus.value - &minus.value) - f0).norm());
        sum_resid = sum_resid.max((&(&plus.value + &minus.value) - &s0).norm());
    }
    records.push(Record::bounded(
        "jump_difference",
        level,
        "sup_residual",
        diff_resid,
        cfg.tol("jump", jump_default(level)),
    ));
    records.push(Record::bounded(
        "jump_sum",
        level,
        "sup_residual",
        sum_resid,
        cfg.tol("jump", jump_default(level)),
    ));
    records.push(Record::verdict(
        "jump_contraction",
        level,
        "probes_contract",
        if contracting { 1.0 } else { 0.0 },
        contracting,
    ));

    // zero data: both limits vanish identically
    let zero = LipschitzData::<f64>::zero(ctx.mesh().clone(), cfg.k, cfg.alpha);
    let z = ctx
        .boundary_limit(&zero, 0, 0, Side::Interior)
        .map_err(lift)?;
    records.push(Record::bounded(
        "jump_zero",
        level,
        "norm",
        z.value.norm(),
        0.0,
    ));
    Ok(records)
}

// ----- Hardy splitting ---------------------------------------------------

fn decompose_suite(cfg: &Config) -> Result<Vec<Record>, ConfigError> {
    let mut records = Vec::new();
    let level = *cfg.levels.last().unwrap();
    let ctx = context(cfg, level)?;
    let data = make_data(cfg, ctx.mesh().clone())?;

    let s = ctx.apply_sk(&data).map_err(lift)?;
    let pplus = data.linear_comb(0.5, &s, 0.5).map_err(lift)?;
    let pminus = data.linear_comb(0.5, &s, -0.5).map_err(lift)?;
    let recon = pplus.linear_comb(1.0, &pminus, 1.0).map_err(lift)?;
    records.push(Record::bounded(
        "split_reconstruction",
        level,
        "sup_error",
        data_error(&recon, &data),
        cfg.tol("projection_identity", 1e-12),
    ));

    // idempotence P+P+ = P+ and annihilation P-P+ = 0 at sampled nodes
    let tol = cfg.tol("involution", 5e-2);
    let mut idem: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for node in sample_nodes(ctx.mesh().len(), 2) {
        for (pos, j) in data.indices().iter().enumerate() {
            let spp = ctx.singular_skj(&pplus, j, node).map_err(lift)?;
            let pp = (pplus.value(pos, node) + &spp).scale(0.5);
            idem = idem.max((&pp - pplus.value(pos, node)).norm());
            let pm = (pplus.value(pos, node) - &spp).scale(0.5);
            cross = cross.max(pm.norm());
        }
    }
    records.push(Record::bounded(
        "projection_idempotent",
        level,
        "sup_error",
        idem,
        tol,
    ));
    records.push(Record::bounded(
        "projection_annihilation",
        level,
        "sup_norm",
        cross,
        tol,
    ));

    // interior trace data (from a polynomial killed by D^{k+1}) is fixed by P+
    let f_poly = random_poly(cfg.m, cfg.k, cfg.seed ^ 0x9e37);
    let trace_data = LipschitzData::from_poly(ctx.mesh().clone(), cfg.k, cfg.alpha, &f_poly);
    let mut fixed: f64 = 0.0;
    for node in sample_nodes(ctx.mesh().len(), 4) {
        for (pos, j) in trace_data.indices().iter().enumerate() {
            let sv = ctx.singular_skj(&trace_data, j, node).map_err(lift)?;
            let pv = (trace_data.value(pos, node) + &sv).scale(0.5);
            fixed = fixed.max((&pv - trace_data.value(pos, node)).norm());
        }
    }
    records.push(Record::bounded(
        "interior_trace_fixed",
        level,
        "sup_error",
        fixed,
        tol,
    ));

    // order-s component combinations of the S output vs the direct quadrature
    if cfg.k >= 1 {
        let node = ctx.mesh().len() / 3;
        let mut outputs: BTreeMap<MultiIndex, Multivector<f64>> = BTreeMap::new();
        for j in data.indices() {
            outputs.insert(j.clone(), ctx.singular_skj(&data, j, node).map_err(lift)?);
        }
        for s_ord in 1..=cfg.k {
            let lhs = combine_components(cfg.m, s_ord, &outputs);
            let rhs = ctx.combination_quadrature(&data, s_ord, node).map_err(lift)?;
            records.push(Record::bounded(
                &format!("component_identity_s{s_ord}"),
                level,
                "residual",
                (&lhs - &rhs).norm(),
                cfg.tol("component_identity", 2e-2),
            ));
        }

        // symbolic defect-derivative identity on polynomial data
        let y_node = ctx.mesh().len() / 2;
        let mut defect_resid: f64 = 0.0;
        for s_ord in 0..cfg.k {
            for u in 1..=(cfg.k - s_ord) {
                let lhs_field = ctx
                    .taylor_defect_field(&trace_data, s_ord, y_node)
                    .dirac_n(u);
                for &zeta_node in sample_nodes(ctx.mesh().len(), 3).iter() {
                    let zeta = ctx.mesh().node(zeta_node);
                    let got = lhs_field.eval(zeta);
                    let want = &ctx.taylor_defect(&trace_data, u + s_ord, zeta_node, y_node)
                        + &ctx.component_combination(&trace_data, u + s_ord, y_node);
                    defect_resid = defect_resid.max((&got - &want).norm());
                }
            }
        }
        records.push(Record::bounded(
            "defect_identity",
            level,
            "sup_residual",
            defect_resid,
            cfg.tol("defect_identity", 1e-10),
        ));
    }
    Ok(records)
}

/// c_s-weighted combination of the S-output components per the closed-form
/// D^s expansion (blades on the left).
pub fn combine_components(
    m: usize,
    s: usize,
    values: &BTreeMap<MultiIndex, Multivector<f64>>,
) -> Multivector<f64> {
    let exp = dirac_power_expansion(s, m);
    let mut acc = Multivector::zero(m);
    for term in &exp.terms {
        let mut v = values[&term.index].scale(term.mult as f64);
        if let Some(i) = term.gen {
            v = Multivector::generator(m, i).geo(&v);
        }
        acc += &v;
    }
    if exp.sign < 0 {
        acc = acc.scale(-1.0);
    }
    acc
}

// ----- Riemann-Hilbert ---------------------------------------------------

fn rh_suite(cfg: &Config) -> Result<Vec<Record>, ConfigError> {
    let mut records = Vec::new();
    let level = *cfg.levels.last().unwrap();
    let ctx = context(cfg, level)?;
    let data = make_data(cfg, ctx.mesh().clone())?;

    let sol = ctx.solve_rh(&data);
    let nodes = sample_nodes(ctx.mesh().len(), 5);
    for (u, resid) in sol.jump_residuals(&nodes).map_err(lift)? {
        records.push(Record::bounded(
            &format!("rh_jump_u{u}"),
            level,
            "sup_residual",
            resid,
            cfg.tol("rh_jump", jump_default(level)),
        ));
    }

    let mut dir = vec![0.0; cfg.m];
    dir[0] = 0.6;
    dir[cfg.m - 1] = 0.8;
    let radii = [10.0, 100.0, 1000.0];
    let decay = sol
        .decay_along_ray(&Vector::new(dir), &radii)
        .map_err(lift)?;
    let max_product = decay.iter().map(|(_, p)| *p).fold(0.0, f64::max);
    records.push(Record::bounded(
        "rh_decay",
        level,
        "max_compensated_norm",
        max_product,
        cfg.tol("rh_decay", 1e3),
    ));
    let far = decay.last().map(|(r, p)| p / r.powi(cfg.m as i32 - 1));
    records.push(Record::bounded(
        "rh_far_field",
        level,
        "norm_at_r1000",
        far.unwrap_or(f64::NAN),
        cfg.tol("rh_far_field", 1e-3),
    ));

    // data whose trace combinations all vanish analytically must produce the
    // zero solution: g = (|x|^2 - R^2)^{k+1} h has D^s g = 0 on the surface
    // for s <= k
    let vanishing = vanishing_combination_poly(cfg.m, cfg.k, cfg.radius, cfg.seed);
    let vdata = LipschitzData::from_poly(ctx.mesh().clone(), cfg.k, cfg.alpha, &vanishing);
    let vsol = ctx.solve_rh(&vdata);
    let mut scale: f64 = 0.0;
    let mut vnorm: f64 = 0.0;
    for &(r, dir0) in &[(0.5, 0), (1.5, 0), (0.4, 1), (1.7, 1)] {
        let mut x = vec![0.0; cfg.m];
        x[dir0] = r * cfg.radius;
        let x = Vector::new(x);
        scale = scale.max(vanishing.eval(&x).norm());
        vnorm = vnorm.max(vsol.eval(&x).map_err(lift)?.norm());
    }
    records.push(Record::bounded(
        "rh_uniqueness",
        level,
        "solution_over_data_scale",
        vnorm / scale.max(1e-14),
        cfg.tol("rh_uniqueness", 1e-6),
    ));

    let zero = LipschitzData::<f64>::zero(ctx.mesh().clone(), cfg.k, cfg.alpha);
    let zsol = ctx.solve_rh(&zero);
    let zx = Vector::new({
        let mut x = vec![0.0; cfg.m];
        x[0] = 0.3 * cfg.radius;
        x
    });
    records.push(Record::bounded(
        "rh_zero_data",
        level,
        "solution_norm",
        zsol.eval(&zx).map_err(lift)?.norm(),
        0.0,
    ));
    Ok(records)
}

/// (|x|^2 - R^2)^{k+1} * h with a fixed low-degree multivector h: vanishes on
/// the sphere of radius R together with all derivatives of order <= k.
pub fn vanishing_combination_poly(m: usize, k: usize, radius: f64, seed: u64) -> PolyField<f64> {
    let mut rng = SplitMix64::new(seed ^ 0xc0de);
    let mut shell = PolyField::constant(Multivector::scalar(m, -radius * radius));
    for i in 0..m {
        let mut sq = MultiIndex::zeros(m);
        sq = sq.incremented(i).incremented(i);
        shell.add_term(sq, Multivector::scalar(m, 1.0));
    }
    let mut g = PolyField::constant(Multivector::scalar(m, 1.0));
    for _ in 0..=k {
        g = g.mul(&shell);
    }
    let mut h = PolyField::constant(Multivector::scalar(m, rng.range(0.5, 1.0)));
    h.add_term(
        MultiIndex::unit(m, 0),
        Multivector::generator(m, 0).scale(rng.range(-0.5, 0.5)),
    );
    g.mul(&h)
}

// ----- Whitney extension -------------------------------------------------

/// |x_1|^{k+alpha}-type data: the canonical fractional-smoothness example.
pub fn fractional_data(
    mesh: Arc<SurfaceMesh<f64>>,
    k: usize,
    alpha: f64,
) -> LipschitzData<f64> {
    let m = mesh.dim();
    let exponent = k as f64 + alpha;
    let jet: polycauchy::whitney::Jet<f64> = std::sync::Arc::new(move |y, j| {
        let t = j.get(0);
        if j.order() != t {
            return Multivector::zero(m);
        }
        let coef: f64 = (0..t).map(|i| exponent - i as f64).product();
        let x1 = y[0];
        let sgn = if t % 2 == 1 { x1.signum() } else { 1.0 };
        Multivector::scalar(m, coef * sgn * x1.abs().powf(exponent - t as f64))
    });
    LipschitzData::from_jet(mesh, k, alpha, jet)
}

fn whitney_suite(cfg: &Config) -> Result<Vec<Record>, ConfigError> {
    let mut records = Vec::new();
    let level = *cfg.levels.last().unwrap();
    let mesh = mesh_for(cfg, level)?;
    let shell = 0.5 * cfg.radius;
    let depth = if cfg.m == 2 { 6 } else { 5 };

    let data = fractional_data(mesh.clone(), cfg.k, cfg.alpha);
    let report = data.validate();
    records.push(Record::verdict(
        "whitney_validator",
        level,
        "lipschitz_constant",
        report.m_est,
        report.ok,
    ));

    let ext = WhitneyExtension::build_with(&data, shell, depth).map_err(lift)?;
    records.push(Record::verdict(
        "whitney_sandwich",
        level,
        "cube_count",
        ext.cube_count() as f64,
        ext.cubes_satisfy_sandwich(),
    ));

    // restriction is bit-exact at every node
    let pos0 = data.position(&MultiIndex::zeros(cfg.m)).map_err(lift)?;
    let mut exact = true;
    for node in 0..mesh.len() {
        let got = ext.eval(mesh.node(node));
        exact &= got
            .coeffs()
            .iter()
            .zip(data.value(pos0, node).coeffs())
            .all(|(a, b)| a.to_bits() == b.to_bits());
    }
    records.push(Record::verdict(
        "whitney_restriction",
        level,
        "bit_exact_nodes",
        if exact { 1.0 } else { 0.0 },
        exact,
    ));

    // partition of unity, read off the extension of constant data on the
    // covered part of the inner plateau
    let mut one_values = Vec::new();
    for j in enumerate_indices(cfg.m, cfg.k) {
        let v = if j.order() == 0 {
            Multivector::scalar(cfg.m, 1.0)
        } else {
            Multivector::zero(cfg.m)
        };
        one_values.push(vec![v; mesh.len()]);
    }
    let ones = LipschitzData::from_parts(mesh.clone(), cfg.k, cfg.alpha, one_values, None)
        .map_err(lift)?;
    let one_ext = WhitneyExtension::build_with(&ones, shell, depth).map_err(lift)?;
    let mut rng = SplitMix64::new(cfg.seed ^ 0x9d2c);
    let mut partition: f64 = 0.0;
    let mut covered = 0usize;
    let mut tried = 0usize;
    while tried < 500 {
        let comps: Vec<f64> = (0..cfg.m).map(|_| rng.range(-1.0, 1.0)).collect();
        let v = Vector::new(comps);
        if v.norm() < 0.2 {
            continue;
        }
        tried += 1;
        let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        let r = cfg.radius * (1.0 + sign * rng.range(0.1, 0.25));
        let x = v.scale(r / v.norm());
        if one_ext.coverage(&x) <= 0.0 {
            continue;
        }
        covered += 1;
        partition = partition.max((one_ext.eval(&x).scalar_part() - 1.0).abs());
        partition = partition.max(
            (&one_ext.eval(&x) - &Multivector::scalar(cfg.m, one_ext.eval(&x).scalar_part()))
                .norm(),
        );
    }
    records.push(Record::bounded(
        "whitney_partition",
        level,
        "sup_deviation_from_one",
        partition,
        cfg.tol("whitney_partition", 1e-10),
    ));
    records.push(Record::verdict(
        "whitney_coverage",
        level,
        "covered_fraction",
        covered as f64 / 500.0,
        covered >= 475,
    ));

    // each derived sub-collection is itself Lipschitz of the reduced order
    let mut sub_ok = true;
    for j in data.indices() {
        sub_ok &= data.sub_collection(j).map_err(lift)?.validate().ok;
    }
    records.push(Record::verdict(
        "whitney_subcollections",
        level,
        "all_validate",
        if sub_ok { 1.0 } else { 0.0 },
        sub_ok,
    ));

    // growth of the (k+1)-st derivative toward the surface
    let mut jtop = MultiIndex::zeros(cfg.m);
    for _ in 0..=cfg.k {
        jtop = jtop.incremented(0);
    }
    // stay inside the covered band: above ~2.5 finest cube diameters, below
    // the outer-cutoff plateau at 60% of the shell
    let finest_diam = shell / f64::from(1u32 << depth) * (cfg.m as f64).sqrt();
    let d_lo = (2.5 * finest_diam / cfg.radius).max(0.02);
    let d_hi = 0.55 * shell / cfg.radius;
    let steps = 10usize;
    let ratio = (d_hi / d_lo).powf(1.0 / (steps as f64 - 1.0));
    let probes: Vec<Vector<f64>> = (0..steps)
        .map(|i| {
            let d = d_lo * ratio.powi(i as i32);
            let mut x = vec![0.0; cfg.m];
            x[cfg.m - 1] = cfg.radius * (1.0 + d);
            Vector::new(x)
        })
        .collect();
    let bound = ext.derivative_bound_check(&jtop, &probes);
    records.push(Record::verdict(
        "whitney_exponent",
        level,
        "fitted_exponent",
        bound.exponent,
        bound.pass,
    ));

    // polynomial data has identically vanishing remainders
    let poly = random_poly(cfg.m, cfg.k, cfg.seed ^ 0x51ab);
    let pdata = LipschitzData::from_poly(mesh.clone(), cfg.k, cfg.alpha, &poly);
    let mut remainder: f64 = 0.0;
    let nodes = sample_nodes(mesh.len(), 8);
    for j in pdata.indices() {
        for &x in &nodes {
            for &y in &nodes {
                remainder = remainder.max(pdata.remainder(j, x, y).map_err(lift)?.norm());
            }
        }
    }
    records.push(Record::bounded(
        "whitney_poly_remainder",
        level,
        "sup_norm",
        remainder,
        cfg.tol("whitney_poly_remainder", 1e-10),
    ));
    Ok(records)
}
