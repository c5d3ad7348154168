//! WebAssembly bindings for the static page in `www/`. Every export takes
//! plain numbers or strings and returns a JSON string, so the same functions
//! run natively in the tests.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use smq_conic::Settings;
use smq_core::boolean::{
    approx_degree, degree, input_bits, multilinear_interpolate, npn_canonical, BooleanFunction,
};
use smq_core::polymethod::{extract_polynomial, polynomial_lower_bound};
use smq_core::process::fixtures::quantum_switch;
use smq_core::process::{random_unitary, ProcessClass};
use smq_core::sdp::{min_error, SdpConfig};
use std::fmt::Display;
use wasm_bindgen::prelude::*;

/// Largest instance the page will solve; n = 4 takes minutes even natively.
pub const MAX_SOLVE_N: u32 = 3;
pub const MAX_SOLVE_T: u32 = 2;
pub const MAX_EXPLORE_N: u32 = 4;

fn err(e: impl Display) -> String {
    e.to_string()
}

fn function(n: u32, id: u32, max_n: u32) -> Result<BooleanFunction, String> {
    if n == 0 || n > max_n {
        return Err(format!("n must be between 1 and {max_n}"));
    }
    BooleanFunction::from_id(n as usize, id as u64).map_err(err)
}

fn bits(f: &BooleanFunction) -> String {
    f.table().iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Truth table, class representative, degrees and the query lower bounds
/// they imply.
#[wasm_bindgen]
pub fn describe_function(n: u32, id: u32) -> Result<String, String> {
    let f = function(n, id, MAX_EXPLORE_N)?;
    let (rep, t) = npn_canonical(&f);
    let (exact_lb, approx_lb) = polynomial_lower_bound(&f).map_err(err)?;
    Ok(json!({
        "n": n,
        "id": id,
        "table": bits(&f),
        "representative": rep.id(),
        "transform": t,
        "degree": degree(&f),
        "approx_degree": approx_degree(&f, 1.0 / 3.0).map_err(err)?,
        "polynomial": multilinear_interpolate(&f).to_string(),
        "exact_query_lower_bound": exact_lb,
        "bounded_error_query_lower_bound": approx_lb,
    })
    .to_string())
}

/// Minimum worst-case error with `t` queries under `class`, with the
/// success probability of the optimal strategy on every input and the
/// polynomial it computes.
#[wasm_bindgen]
pub fn solve_function(n: u32, id: u32, t: u32, class: &str, tol: f64) -> Result<String, String> {
    let f = function(n, id, MAX_SOLVE_N)?;
    if t == 0 || t > MAX_SOLVE_T {
        return Err(format!("T must be between 1 and {MAX_SOLVE_T}"));
    }
    let class: ProcessClass = class.parse().map_err(err)?;
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err("tolerance must be in (0, 1e-2]".into());
    }
    let cfg = SdpConfig {
        settings: Settings {
            tol,
            ..Settings::default()
        },
        ..SdpConfig::default()
    };
    let r = min_error(&f, t as usize, class, &cfg).map_err(err)?;
    let success: Vec<f64> = (0..1usize << n)
        .map(|p| r.primal.evaluate(&f, &input_bits(n as usize, p)))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let g = extract_polynomial(&r.primal).map_err(err)?.truncated(1e-7);
    Ok(json!({
        "n": n,
        "id": id,
        "T": t,
        "class": class,
        "eps_primal": r.eps_primal,
        "eps_dual": r.eps_dual,
        "status": r.status.to_string(),
        "iterations": r.iterations,
        "success": success,
        "polynomial": g.to_string(),
        "polynomial_degree": g.degree(1e-7),
    })
    .to_string())
}

/// The quantum switch against its fixed-order image: with the same unitary
/// in both slots the actions coincide, with different ones they need not.
#[wasm_bindgen]
pub fn switch_deviation(seed: u32, trials: u32) -> Result<String, String> {
    if trials == 0 || trials > 200 {
        return Err("trials must be between 1 and 200".into());
    }
    let sw = quantum_switch(2).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let mut same = Vec::new();
    let mut distinct = Vec::new();
    for _ in 0..trials {
        let u = random_unitary(2, &mut rng);
        let pair = [u.clone(), u];
        same.push(sw.action_qc(&pair).map_err(err)?.distance(&sw.action_fo(&pair).map_err(err)?).map_err(err)?);
        let pair = [random_unitary(2, &mut rng), random_unitary(2, &mut rng)];
        distinct.push(sw.action_qc(&pair).map_err(err)?.distance(&sw.action_fo(&pair).map_err(err)?).map_err(err)?);
    }
    Ok(json!({
        "trials": trials,
        "same": same,
        "distinct": distinct,
        "max_same": same.iter().cloned().fold(0.0, f64::max),
        "min_distinct": distinct.iter().cloned().fold(f64::INFINITY, f64::min),
    })
    .to_string())
}
