use crate::CliResult;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use smq_core::process::fixtures::quantum_switch;
use smq_core::process::{random_unitary, ProcessScenario, QcImplementation};

#[derive(Debug, Clone)]
pub struct QcCheckConfig {
    pub seed: u64,
    pub trials: usize,
    pub unitaries: usize,
    /// `(T, d)` pairs used in turn.
    pub shapes: Vec<(usize, usize)>,
}

impl Default for QcCheckConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            trials: 20,
            unitaries: 20,
            shapes: vec![(2, 2), (3, 2), (2, 3)],
        }
    }
}

/// Largest deviation between a quantum-controlled supermap and its
/// fixed-order image on repeated unitaries, and the same comparison with
/// distinct unitaries as a control.
#[derive(Debug, Clone, Serialize)]
pub struct QcReport {
    pub trials: usize,
    pub unitaries_per_trial: usize,
    pub max_deviation: f64,
    pub switch_deviation: f64,
    pub distinct_max_deviation: f64,
    pub distinct_min_deviation: f64,
    /// Share of trials whose distinct-unitary deviation exceeds 0.01.
    pub distinct_fraction_above: f64,
}

pub fn verify_qc(c: &QcCheckConfig) -> CliResult<QcReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut max_dev: f64 = 0.0;
    let (mut dmax, mut dmin, mut above) = (0.0f64, f64::INFINITY, 0usize);
    for trial in 0..c.trials {
        let (slots, d) = c.shapes[trial % c.shapes.len().max(1)];
        let sc = ProcessScenario::new(slots, d, d, d)?;
        let imp = QcImplementation::random(sc, &mut rng)?;
        let wq = imp.process_vector()?;
        let wf = imp.fo_process_vector()?;
        for _ in 0..c.unitaries {
            let u = vec![random_unitary(d, &mut rng); slots];
            let dev = imp.act_on(&wq, &u)?.distance(&imp.act_on(&wf, &u)?)?;
            max_dev = max_dev.max(dev);
        }
        let distinct: Vec<_> = (0..slots).map(|_| random_unitary(d, &mut rng)).collect();
        let dev = imp.act_on(&wq, &distinct)?.distance(&imp.act_on(&wf, &distinct)?)?;
        dmax = dmax.max(dev);
        dmin = dmin.min(dev);
        above += (dev > 1e-2) as usize;
    }
    let sw = quantum_switch(2)?;
    let mut switch_dev: f64 = 0.0;
    for _ in 0..c.unitaries.max(1) {
        let u = vec![random_unitary(2, &mut rng); 2];
        switch_dev = switch_dev.max(sw.action_qc(&u)?.distance(&sw.action_fo(&u)?)?);
    }
    Ok(QcReport {
        trials: c.trials,
        unitaries_per_trial: c.unitaries,
        max_deviation: max_dev,
        switch_deviation: switch_dev,
        distinct_max_deviation: dmax,
        distinct_min_deviation: if c.trials == 0 { 0.0 } else { dmin },
        distinct_fraction_above: if c.trials == 0 { 0.0 } else { above as f64 / c.trials as f64 },
    })
}
