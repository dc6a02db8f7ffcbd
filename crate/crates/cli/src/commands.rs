use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use deformkit::alignment::{bottleneck_match, empirical_modulus_report};
use deformkit::jets::{jet_align_roots, JetPoly};
use deformkit::metrics::{counterexample_report, hausdorff as hausdorff_distance};
use deformkit::polycore::random_deformation;
use deformkit::uniroots::{cluster_multiplicities, find_roots, UniPoly};
use deformkit::varieties::{
    containment_check, default_axis, delta_bound, lemma_check, sample_hypersurface,
    system_residual, variety_jet_check, JetCheckParams, SampleCloud,
};
use deformkit::{Point, PolySystem, SparsePoly};

use crate::{
    AlignArgs, CliError, ContainArgs, CounterexampleArgs, Format, HausdorffArgs, JetLiftArgs,
    LemmaArgs, ModulusArgs, Output, RootsArgs, VarietyArgs,
};

fn required<T: Copy>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Input(format!("missing required flag {flag}")))
}

fn required_path<'a>(
    value: &'a Option<std::path::PathBuf>,
    flag: &str,
) -> Result<&'a Path, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Input(format!("missing required flag {flag}")))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: deformkit::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| match e {
        deformkit::Error::Parse(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => CliError::Lib(other),
    })
}

fn load_poly(path: &Path) -> Result<SparsePoly, CliError> {
    with_path(path, SparsePoly::from_json(&read(path)?))
}

fn load_unipoly(path: &Path) -> Result<UniPoly, CliError> {
    Ok(UniPoly::from_sparse(&load_poly(path)?)?)
}

fn load_cloud(path: &Path) -> Result<SampleCloud, CliError> {
    let text = read(path)?;
    with_path(
        path,
        SampleCloud::read_csv(text.as_bytes(), path.display().to_string()),
    )
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn report<T: Serialize>(value: &T) -> Output {
    Output::Report(serde_json::to_value(value).expect("report serializes"))
}

fn json_only(format: Format, what: &str) -> Result<(), CliError> {
    if format == Format::Csv {
        return Err(CliError::Input(format!(
            "{what} has no point cloud; CSV output is not available"
        )));
    }
    Ok(())
}

fn cloud_output(cloud: &SampleCloud) -> Output {
    Output::Csv(cloud.to_csv_string())
}

pub fn roots(a: &RootsArgs, format: Format) -> Result<Output, CliError> {
    let f = load_unipoly(required_path(&a.f, "--f")?)?;
    let raw = find_roots(&f, a.tol)?;
    let clustered = cluster_multiplicities(&raw, a.cluster_radius)?;
    if format == Format::Csv {
        let points = clustered
            .roots
            .iter()
            .map(|r| Point::new(vec![r.value()]))
            .collect();
        return Ok(cloud_output(&SampleCloud::new(points, "roots")?));
    }
    Ok(Output::Report(json!({
        "degree": f.degree(),
        "residual_bound": raw.residual_bound,
        "roots": raw.roots,
        "clustered": clustered.roots,
    })))
}

pub fn align(a: &AlignArgs, format: Format) -> Result<Output, CliError> {
    json_only(format, "align")?;
    let f = load_unipoly(required_path(&a.f, "--f")?)?;
    let g = load_unipoly(required_path(&a.g, "--g")?)?;
    let rf = find_roots(&f, a.tol)?;
    let rg = find_roots(&g, a.tol)?;
    let m = bottleneck_match(&rf, &rg)?;
    let mut out = json!({
        "roots_f": rf.expanded(),
        "roots_g": rg.expanded(),
        "matching": m,
    });
    if let Some(eps) = a.eps {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(CliError::Input(format!(
                "--eps must be positive, got {eps}"
            )));
        }
        out["eps"] = json!(eps);
        out["pass"] = json!(m.bottleneck < eps);
    }
    Ok(Output::Report(out))
}

pub fn modulus(a: &ModulusArgs, seed: u64, format: Format) -> Result<Output, CliError> {
    json_only(format, "modulus")?;
    let f = load_unipoly(required_path(&a.f, "--f")?)?;
    let eps = required(a.eps, "--eps")?;
    Ok(report(&empirical_modulus_report(&f, eps, a.trials, seed)?))
}

pub fn jet_lift(a: &JetLiftArgs, format: Format) -> Result<Output, CliError> {
    json_only(format, "jet-lift")?;
    let path = required_path(&a.f, "--f")?;
    let f_sparse = load_poly(path)?;
    let f = UniPoly::from_sparse(&f_sparse)?;
    let g = match (&a.g, &a.q) {
        (Some(p), _) => with_path(p, JetPoly::from_json(&read(p)?))?,
        (None, Some(p)) => JetPoly::deformation(&f_sparse, &load_poly(p)?, a.exp, a.order)?,
        (None, None) => return Err(CliError::Input("one of --g or --q is required".into())),
    };
    Ok(report(&jet_align_roots(&f, &g, a.order)?))
}

/// `g` from file, or a random deformation at 0.9 of the perturbation bound.
fn perturbed(
    f: &SparsePoly,
    g: &Option<std::path::PathBuf>,
    eps: f64,
    t: f64,
    seed: u64,
) -> Result<(SparsePoly, bool), CliError> {
    if let Some(p) = g {
        return Ok((load_poly(p)?, false));
    }
    let (d, size) = f.degree_and_support()?;
    let bound = delta_bound(eps, t, d, size)?;
    Ok((random_deformation(f, 0.9 * bound, seed)?, true))
}

pub fn lemma(a: &LemmaArgs, seed: u64, format: Format) -> Result<Output, CliError> {
    json_only(format, "lemma")?;
    let f = load_poly(required_path(&a.f, "--f")?)?;
    let eps = required(a.eps, "--eps")?;
    let (g, generated) = perturbed(&f, &a.g, eps, a.t, seed)?;
    let r = lemma_check(&f, &g, a.t, eps, a.grid)?;
    let mut out = serde_json::to_value(&r).expect("report serializes");
    if generated {
        out["g"] = serde_json::to_value(&g).expect("poly serializes");
    }
    Ok(Output::Report(out))
}

pub fn contain(a: &ContainArgs, seed: u64, format: Format) -> Result<Output, CliError> {
    let f = load_poly(required_path(&a.f, "--f")?)?;
    let eps = required(a.eps, "--eps")?;
    let (g, generated) = perturbed(&f, &a.g, eps, a.t, seed)?;
    let r = containment_check(&f, &g, a.t, eps, a.grid, a.tol)?;
    if format == Format::Csv {
        let s = sample_hypersurface(&f, a.t, r.axis, a.grid, a.tol)?;
        return Ok(cloud_output(&s.cloud));
    }
    let mut out = serde_json::to_value(&r).expect("report serializes");
    if generated {
        out["g"] = serde_json::to_value(&g).expect("poly serializes");
    }
    Ok(Output::Report(out))
}

pub fn variety(a: &VarietyArgs, seed: u64, format: Format) -> Result<Output, CliError> {
    let path = required_path(&a.system, "--system")?;
    let system: PolySystem = load_json(path)?;
    let jets: Vec<JetPoly> = match &a.jets {
        Some(p) => load_json(p)?,
        None => system
            .polys()
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let q = random_deformation(f, 1.0, seed.wrapping_add(k as u64))?.try_sub(f)?;
                JetPoly::deformation(f, &q, 1, a.order)
            })
            .collect::<deformkit::Result<_>>()?,
    };
    let samples = match &a.samples {
        Some(p) => load_cloud(p)?,
        None => {
            let f = &system.polys()[0];
            sample_hypersurface(f, a.t, default_axis(f), a.grid, a.tol)?.cloud
        }
    };
    if format == Format::Csv {
        return Ok(cloud_output(&samples));
    }
    let params = JetCheckParams {
        order: a.order,
        tol: a.tol,
        seed,
        perturbations: a.perturbations,
    };
    let check = variety_jet_check(&system, &jets, &samples, &params)?;
    let residuals = samples
        .points()
        .iter()
        .map(|z| system_residual(&system, z))
        .collect::<deformkit::Result<Vec<f64>>>()?;
    let on_variety = residuals.iter().filter(|&&r| r <= a.tol).count();
    let max = residuals.iter().copied().fold(0.0, f64::max);
    Ok(Output::Report(json!({
        "equations": system.len(),
        "nvars": system.nvars(),
        "residual_sweep": {
            "samples": residuals.len(),
            "on_variety": on_variety,
            "max_residual": max,
        },
        "jet_check": check,
    })))
}

pub fn hausdorff(a: &HausdorffArgs, format: Format) -> Result<Output, CliError> {
    json_only(format, "hausdorff")?;
    let w = load_cloud(required_path(&a.w, "--w")?)?;
    let z = load_cloud(required_path(&a.z, "--z")?)?;
    if let (Some(m), Some(n)) = (w.dim(), z.dim()) {
        if m != n {
            return Err(deformkit::Error::DimensionMismatch {
                expected: m,
                found: n,
            }
            .into());
        }
    }
    let d = hausdorff_distance(&w, &z)?;
    let mut out = json!({
        "w_points": w.len(),
        "z_points": z.len(),
        "hausdorff": d,
    });
    if let Some(eps) = a.eps {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(CliError::Input(format!(
                "--eps must be positive, got {eps}"
            )));
        }
        out["eps"] = json!(eps);
        out["eps_deformation"] = json!(d < eps);
    }
    Ok(Output::Report(out))
}

pub fn counterexample(a: &CounterexampleArgs, format: Format) -> Result<Output, CliError> {
    let dp = required(a.delta_prime, "--delta-prime")?;
    let eps = required(a.eps, "--eps")?;
    let t = required(a.t, "--T")?;
    let r = counterexample_report(dp, eps, t, a.grid)?;
    if format == Format::Csv {
        let points = r.witnesses.iter().map(|w| w.point.clone()).collect();
        return Ok(cloud_output(&SampleCloud::new(points, "witnesses")?));
    }
    Ok(report(&r))
}
