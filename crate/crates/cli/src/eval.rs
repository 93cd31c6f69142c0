//! `eval`: both Hamiltonian families, the Lax spectrum and the actions at one point.

use clap::Args;
use serde::Serialize;

use rsvd_core::equivalence::Transform;
use rsvd_core::spectral::spectrum;
use rsvd_core::vandiejen::MAX_DIRECT_N;
use rsvd_core::{build_lax, char_poly_eigen, eval_all_h, extract_actions, main_hamiltonian, Params, PhasePoint};

use crate::common::{max_rel, rel, to_json, CliError, CliResult, CouplingArgs, Echo, PointArgs};

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub couplings: CouplingArgs,
    /// Skip the direct family and map the Lax invariants instead (any n).
    #[arg(long)]
    pub spectral_only: bool,
    /// Include the Lax matrix as row-major [re, im] pairs.
    #[arg(long)]
    pub dump_lax: bool,
}

#[derive(Debug, Serialize)]
struct TransformResiduals {
    /// `max_l |vd_from_lax(K)_l - H_l| / (1 + |H_l|)`.
    vd_from_lax: f64,
    /// `max_m |lax_from_vd(H)_m - K_m| / (1 + |K_m|)`, `m <= n`.
    lax_from_vd: f64,
    /// `lax_from_vd(vd_from_lax(K))` against `K`.
    round_trip: f64,
    /// `|K_1 + 2H| / (1 + |2H|)`.
    k1_plus_2h: f64,
    /// `|H_1 - 2(H - n)| / (1 + |2(H - n)|)`.
    h1_anchor: f64,
}

#[derive(Debug, Serialize)]
struct EvalReport<'a> {
    config: Echo<'a, EvalArgs>,
    point: &'a PhasePoint,
    params: Params,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "H_family")]
    h_family: Vec<f64>,
    /// `"direct"` or `"spectral"`.
    h_family_route: &'static str,
    #[serde(rename = "K_family")]
    k_family: Vec<f64>,
    spectrum: Vec<f64>,
    q_actions: Vec<f64>,
    transform_residuals: Option<TransformResiduals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lax: Option<Vec<Vec<[f64; 2]>>>,
}

pub fn run(args: &EvalArgs) -> CliResult<bool> {
    let params = args.couplings.params()?;
    let point = args.point.resolve(2)?;
    let n = point.n();
    if n > MAX_DIRECT_N && !args.spectral_only {
        return Err(CliError::usage(format!(
            "direct evaluation is limited to n <= {MAX_DIRECT_N} (got {n}); pass --spectral-only for the spectral route"
        )));
    }
    let h = main_hamiltonian(&point, &params);
    let lax = build_lax(&point, &params)?;
    let k = char_poly_eigen(&lax)?;
    let eigenvalues = spectrum(&lax)?;
    let q = extract_actions(&lax)?;
    let transform = Transform::new(n, n)?;
    let k_low = &k.as_slice()[..=n];
    let mapped = transform.vd_from_lax(k_low);

    let (h_family, route, residuals) = if args.spectral_only {
        (mapped, "spectral", None)
    } else {
        let direct = eval_all_h(&point, &params)?.values().to_vec();
        let residuals = TransformResiduals {
            vd_from_lax: max_rel(&mapped, &direct),
            lax_from_vd: max_rel(&transform.lax_from_vd(&direct), k_low),
            round_trip: max_rel(&transform.lax_from_vd(&mapped), k_low),
            k1_plus_2h: rel(k.get(1), -2.0 * h),
            h1_anchor: rel(direct[1], 2.0 * (h - n as f64)),
        };
        (direct, "direct", Some(residuals))
    };

    let report = EvalReport {
        config: Echo { command: "eval", args },
        point: &point,
        params,
        h,
        h_family,
        h_family_route: route,
        k_family: k.as_slice().to_vec(),
        spectrum: eigenvalues,
        q_actions: q.q().to_vec(),
        transform_residuals: residuals,
        lax: args.dump_lax.then(|| lax.matrix().to_pairs()),
    };
    println!("{}", to_json(&report));
    Ok(true)
}
