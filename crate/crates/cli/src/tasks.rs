use kflow::examples::{dirac_circle, random_crossing_path, weighted_model, Crossing};
use kflow::kk_pairing::{cos_identity_check, pairing_report, trig_identity_check, Embedding, PairingData};
use kflow::spec_flow::{eigenvalue_tracks, spectral_flow_report, TrackPoint};
use kflow::spectral_triple::{
    check_kasparov_module, conjugation_path, pushforward_sf, resolvent_integral_check, sf_unbounded, sf_unitary_report,
    VnTriple,
};
use kflow::{
    boundary_map, corner_index, is_corner_fredholm, quotient_norm, tau_star, BlockOperator, Error,
    K0Class, OperatorPath, Tolerances, VnAlgebra,
};

use crate::report::Report;
use crate::schema::{
    algebra_spec, matrices_from_operator, GenerateSpec, GeneratorSpec, Keyframe, OpRef, PathSpec, PsiSpec, TaskFile,
    TaskKind, ToleranceSpec,
};
use crate::{CliError, RunOptions};

/// Samples per unit time in CSV eigenvalue tracks.
pub const TRACK_SAMPLES: usize = 200;

pub enum Outcome {
    Report(Report),
    Model(Box<TaskFile>),
}

pub struct Run {
    pub outcome: Outcome,
    pub tracks: Option<Vec<TrackPoint>>,
}

pub fn run_task(file: &TaskFile, opts: &RunOptions) -> Result<Run, CliError> {
    let tol = opts.tolerances(&file.tolerances)?;
    if file.task == TaskKind::Generate {
        let spec = file
            .generate
            .as_ref()
            .ok_or_else(|| CliError::Schema("task generate needs a \"generate\" object".into()))?;
        let seed = opts.seed.or(file.seed).unwrap_or(0);
        if opts.tracks {
            return Err(CliError::Schema("task generate has no path to track".into()));
        }
        return Ok(Run { outcome: Outcome::Model(Box::new(generate(spec, seed, &tol)?)), tracks: None });
    }

    let alg = file.algebra()?;
    let mut report = Report::new(file.task.name());
    let mut track_path: Option<OperatorPath> = None;
    match file.task {
        TaskKind::SpectralFlow => {
            let path = file.path(&alg)?;
            let flow = spectral_flow_report(&path, &alg, &tol)?;
            set_class(&mut report, &flow.class, &alg)?;
            report.partition = flow.partition();
            report.diagnostics.min_quotient_gap = finite(flow.certificate.min_gap);
            report.residual("max_lipschitz", flow.certificate.max_lipschitz);
            track_path = Some(path);
        }
        TaskKind::SfUnitary => {
            let (triple, unitary) = triple(file, &alg, &tol)?;
            let unitary = unitary.ok_or_else(|| CliError::Schema("task sf_unitary needs \"unitary\"".into()))?;
            let flow = sf_unitary_report(&triple, &unitary, &tol)?;
            set_class(&mut report, &flow.class, &alg)?;
            report.residual("commutator", flow.commutator);
            if let Some(mask) = &file.sub_ideal {
                let push = pushforward_sf(&triple, &unitary, mask, &tol)?;
                let sub_alg = alg.with_ideal_mask(mask)?;
                report.residual("sub_ideal_tau", tau_star(&push.sub_class, &sub_alg)?);
            }
            report.residual("resolvent_defect", triple.resolvent_defect());
            let perturbation = conjugation_path(&triple, &unitary)?;
            track_path = Some(perturbation.map_keyframes(|a| triple.dirac() + a));
        }
        TaskKind::SfUnbounded => {
            let (triple, _) = triple(file, &alg, &tol)?;
            let perturbation = file.path(&alg)?;
            let class = sf_unbounded(&triple, &perturbation, &tol)?;
            set_class(&mut report, &class, &alg)?;
            report.residual("resolvent_defect", triple.resolvent_defect());
            track_path = Some(perturbation.map_keyframes(|a| triple.dirac() + a));
        }
        TaskKind::Index => {
            let s = file.require(&file.s, "S", &alg)?;
            let p = file.require(&file.p, "p", &alg)?;
            let q = file.require(&file.q, "q", &alg)?;
            let fredholm = is_corner_fredholm(&s, &p, &q, &alg, &tol)?;
            let class = corner_index(&s, &p, &q, &alg, &tol)?;
            set_class(&mut report, &class, &alg)?;
            report.diagnostics.min_quotient_gap = finite(fredholm.min_gap);
        }
        TaskKind::Boundary => {
            let s = file.require(&file.s, "S", &alg)?;
            let class = boundary_map(&s, &alg, &tol)?;
            set_class(&mut report, &class, &alg)?;
            let id = BlockOperator::identity(&alg);
            report.residual("left_unitarity", quotient_norm(&(&(&s.adjoint() * &s) - &id), &alg)?);
            report.residual("right_unitarity", quotient_norm(&(&(&s * &s.adjoint()) - &id), &alg)?);
        }
        TaskKind::Pairing => {
            let p = file.require(&file.p, "p", &alg)?;
            let u = file.require(&file.unitary, "unitary", &alg)?;
            let psi = match &file.psi {
                None | Some(PsiSpec::Identity) => Embedding::Identity,
                Some(PsiSpec::Conjugation(w)) => Embedding::Conjugation(file.resolve(w, &alg)?),
            };
            let data = PairingData::new(alg.clone(), psi, p, u, &tol)?;
            let pairing = pairing_report(&data, &tol)?;
            set_class(&mut report, &pairing.class, &alg)?;
            report.residual("left_unitarity", pairing.left_residual);
            report.residual("right_unitarity", pairing.right_residual);
            report.residual("commutator", data.commutator());
            report.residual("projection_defect", data.projection_defect());
        }
        TaskKind::Checks => checks(file, &alg, &tol, &mut report)?,
        TaskKind::Generate => unreachable!("handled above"),
    }

    let tracks = if opts.tracks {
        let path = track_path.ok_or_else(|| {
            CliError::Schema(format!("task {} has no path to track", file.task.name()))
        })?;
        Some(eigenvalue_tracks(&path, TRACK_SAMPLES))
    } else {
        None
    };
    Ok(Run { outcome: Outcome::Report(report), tracks })
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn set_class(report: &mut Report, class: &K0Class, alg: &VnAlgebra) -> Result<(), Error> {
    report.k0_class = class.ranks().to_vec();
    report.tau = Some(tau_star(class, alg)?);
    Ok(())
}

/// Assemble the triple of a task file. The unitary, when given, joins the
/// generators; the unit is added under the name `"1"` when absent.
fn triple(file: &TaskFile, alg: &VnAlgebra, tol: &Tolerances) -> Result<(VnTriple, Option<String>), CliError> {
    let dirac = file.require(&file.dirac, "D", alg)?;
    let mut generators: Vec<(String, BlockOperator)> = Vec::new();
    for (name, r) in file.generators.iter().flat_map(|g| g.entries()) {
        generators.push((name, file.resolve(&r, alg)?));
    }
    let unitary = match &file.unitary {
        Some(OpRef::Name(name)) => {
            if !generators.iter().any(|(n, _)| n == name) {
                generators.push((name.clone(), file.resolve(&OpRef::Name(name.clone()), alg)?));
            }
            Some(name.clone())
        }
        Some(inline @ OpRef::Inline(_)) => {
            generators.push(("unitary".into(), file.resolve(inline, alg)?));
            Some("unitary".into())
        }
        None => None,
    };
    let id = BlockOperator::identity(alg);
    if !generators.iter().any(|(_, a)| (a - &id).norm() <= tol.projection_slack(1.0)) {
        if generators.iter().any(|(n, _)| n == "1") {
            return Err(CliError::Schema("generator \"1\" is not the unit".into()));
        }
        generators.insert(0, ("1".into(), id));
    }
    Ok((VnTriple::new(alg.clone(), generators, dirac, tol)?, unitary))
}

fn checks(file: &TaskFile, alg: &VnAlgebra, tol: &Tolerances, report: &mut Report) -> Result<(), CliError> {
    if file.dirac.is_some() {
        let (triple, _) = triple(file, alg, tol)?;
        report.residual("resolvent_defect", triple.resolvent_defect());
        let kasparov = check_kasparov_module(&triple, tol)?;
        for e in &kasparov.entries {
            report.residual(&format!("kasparov.{}.commutator", e.generator), e.commutator);
            report.residual(&format!("kasparov.{}.one_minus_f_squared", e.generator), e.one_minus_f_squared);
            report.residual(&format!("kasparov.{}.f_minus_adjoint", e.generator), e.f_minus_adjoint);
        }
        let id = BlockOperator::identity(alg);
        for (name, a) in triple.generators() {
            let check = resolvent_integral_check(&triple, a, &id)?;
            report.residual(&format!("resolvent_integral.{name}.relative"), check.relative);
        }
    }
    if file.q.is_some() {
        let q = file.require(&file.q, "q", alg)?;
        report.residual("cos_identity", cos_identity_check(&q, alg, tol)?);
        let (min_sin, defect) = trig_identity_check(&q);
        report.residual("sin_min_eigenvalue", min_sin);
        report.residual("sin2_plus_cos2", defect);
    }
    if report.diagnostics.residuals.is_empty() {
        return Err(CliError::Schema("task checks needs \"D\" or \"q\"".into()));
    }
    Ok(())
}

/// Model task file for a generator spec.
pub fn generate(spec: &GenerateSpec, seed: u64, tol: &Tolerances) -> Result<TaskFile, CliError> {
    let mut file = TaskFile {
        task: TaskKind::SpectralFlow,
        algebra: None,
        operators: Default::default(),
        path: None,
        tolerances: ToleranceSpec::default(),
        seed: None,
        dirac: None,
        generators: None,
        unitary: None,
        s: None,
        p: None,
        q: None,
        sub_ideal: None,
        psi: None,
        generate: None,
    };
    match spec {
        GenerateSpec::Dirac { m, k } => {
            let model = dirac_circle(*m, *k, tol)?;
            let triple = &model.triple;
            file.task = TaskKind::SfUnitary;
            file.algebra = Some(algebra_spec(triple.algebra()));
            file.operators.insert("D".into(), matrices_from_operator(triple.dirac()));
            for (name, a) in triple.generators() {
                file.operators.insert(name.clone(), matrices_from_operator(a));
            }
            file.dirac = Some(OpRef::Name("D".into()));
            file.generators =
                Some(GeneratorSpec::Names(triple.generators().iter().map(|(n, _)| n.clone()).collect()));
            file.unitary = Some(OpRef::Name(model.unitary.clone()));
        }
        GenerateSpec::Crossing { n, crossings, weight } => {
            let schedule = crossings
                .iter()
                .map(|s| s.parse::<Crossing>())
                .collect::<Result<Vec<_>, Error>>()?;
            let alg = weighted_model(&[*n], &[weight.unwrap_or(1.0)], &[true])?;
            let path = random_crossing_path(*n, &schedule, seed)?;
            let width = path.keyframes().len().to_string().len();
            let mut keyframes = Vec::new();
            for (i, (t, op)) in path.keyframes().iter().enumerate() {
                let name = format!("B{i:0width$}");
                file.operators.insert(name.clone(), matrices_from_operator(op));
                keyframes.push(Keyframe { t: *t, op: OpRef::Name(name) });
            }
            file.algebra = Some(algebra_spec(&alg));
            file.path = Some(PathSpec { keyframes });
            file.seed = Some(seed);
        }
    }
    Ok(file)
}
