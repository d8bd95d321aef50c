use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{run_check, CheckKind, Outcome, Theorem};
use crate::config::EnsembleConfig;
use crate::generate::gen_scenario;
use crate::json::{Real, ScenarioJson};
use crate::InputError;

/// Full scenario dumps kept per check; the count covers all failures.
pub const MAX_DUMPS: usize = 25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    pub reason: String,
    pub lhs: Real,
    pub rhs: Real,
    /// `None` past [`MAX_DUMPS`] or when generation itself failed.
    pub scenario: Option<ScenarioJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremStats {
    pub kind: CheckKind,
    pub instances: usize,
    /// Scenarios inside the check's standing assumptions.
    pub applicable: usize,
    pub generation_failures: usize,
    pub hypothesis_satisfied: usize,
    /// Bounds, implications and identities that passed.
    pub holds: usize,
    /// Equivalence reports that were consistent.
    pub consistent: usize,
    /// Applicable scenarios with a stable perturbation of `a`.
    pub stable: usize,
    pub unstable: usize,
    /// Largest `lhs/rhs` over hypothesis-satisfying bound instances.
    pub max_ratio: Option<Real>,
    pub worst_margin: Option<Real>,
    pub failure_count: usize,
    pub failures: Vec<Failure>,
}

impl TheoremStats {
    fn new(kind: CheckKind) -> Self {
        TheoremStats {
            kind,
            instances: 0,
            applicable: 0,
            generation_failures: 0,
            hypothesis_satisfied: 0,
            holds: 0,
            consistent: 0,
            stable: 0,
            unstable: 0,
            max_ratio: None,
            worst_margin: None,
            failure_count: 0,
            failures: Vec::new(),
        }
    }

    fn passed(&self) -> usize {
        self.holds + self.consistent
    }

    /// No failures, and every applicable scenario passed.
    pub fn clean(&self) -> bool {
        self.failure_count == 0 && self.passed() == self.applicable
    }

    fn fail(&mut self, f: Failure) {
        self.failure_count += 1;
        let mut f = f;
        if self.failures.len() >= MAX_DUMPS {
            f.scenario = None;
        }
        self.failures.push(f);
    }

    fn add(&mut self, o: &Outcome, index: usize, seed: u64, dump: impl FnOnce() -> ScenarioJson) {
        self.instances += 1;
        if !o.applicable {
            return;
        }
        self.applicable += 1;
        match o.stable {
            Some(true) => self.stable += 1,
            Some(false) => self.unstable += 1,
            None => {}
        }
        if o.hypothesis {
            self.hypothesis_satisfied += 1;
            if self.kind == CheckKind::Bound {
                let r = o.ratio();
                let m = o.margin();
                self.max_ratio = Some(Real(self.max_ratio.map_or(r, |x| x.0.max(r))));
                self.worst_margin = Some(Real(self.worst_margin.map_or(m, |x| x.0.min(m))));
            }
        }
        if o.ok {
            if self.kind == CheckKind::Equivalence {
                self.consistent += 1;
            } else {
                self.holds += 1;
            }
        } else {
            self.fail(Failure {
                index,
                seed,
                reason: o.note.clone(),
                lhs: Real(o.lhs),
                rhs: Real(o.rhs),
                scenario: Some(dump()),
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub config: EnsembleConfig,
    pub theorems: BTreeMap<Theorem, TheoremStats>,
    pub total_failures: usize,
    /// Not part of the reproducible content; see [`CampaignReport::reproducible`].
    pub wall_time_s: f64,
}

impl CampaignReport {
    pub fn clean(&self) -> bool {
        self.total_failures == 0 && self.theorems.values().all(|t| t.clean())
    }

    /// The report with timing zeroed, for comparisons between runs.
    pub fn reproducible(&self) -> CampaignReport {
        CampaignReport {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

/// One row of the bound table (`--csv`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub theorem: Theorem,
    pub n: usize,
    pub kappa: f64,
    pub hyp: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

type Evaluated = Result<(Outcome, Option<ScenarioJson>), String>;

fn evaluate(
    config: &EnsembleConfig,
    theorems: &[Theorem],
    index: usize,
) -> (usize, Vec<Evaluated>) {
    let generated = match gen_scenario(config, index) {
        Ok(g) => g,
        Err(e) => return (0, theorems.iter().map(|_| Err(e.to_string())).collect()),
    };
    let results = theorems
        .iter()
        .map(|&t| {
            let s = generated.scenario_for(t).map_err(|e| e.to_string())?;
            let (o, _) = run_check(t, &s, config.rhs_divisor).map_err(|e| e.to_string())?;
            let dump = (!o.ok && o.applicable).then(|| ScenarioJson::from(&s));
            Ok((o, dump))
        })
        .collect();
    (generated.n, results)
}

/// Runs every selected check on `config.count` scenarios.
///
/// Scenarios are evaluated in parallel and folded in index order, so the
/// report depends only on the configuration.
pub fn run_campaign(
    config: &EnsembleConfig,
) -> Result<(CampaignReport, Vec<BoundRow>), InputError> {
    config.validate()?;
    let theorems = config.theorem_list()?;
    let start = Instant::now();
    let evaluated: Vec<(usize, Vec<Evaluated>)> = (0..config.count)
        .into_par_iter()
        .map(|i| evaluate(config, &theorems, i))
        .collect();

    let mut stats: BTreeMap<Theorem, TheoremStats> = theorems
        .iter()
        .map(|&t| (t, TheoremStats::new(t.kind())))
        .collect();
    let mut rows = Vec::new();
    for (index, (n, results)) in evaluated.into_iter().enumerate() {
        for (&t, r) in theorems.iter().zip(results) {
            let st = stats.get_mut(&t).expect("initialized above");
            match r {
                Ok((o, dump)) => {
                    if t.kind() == CheckKind::Bound && o.applicable {
                        rows.push(BoundRow {
                            theorem: t,
                            n,
                            kappa: o.kappa,
                            hyp: o.hypothesis,
                            lhs: o.lhs,
                            rhs: o.rhs,
                            margin: o.margin(),
                        });
                    }
                    st.add(&o, index, config.seed, || dump.expect("dumped on failure"));
                }
                Err(reason) => {
                    st.instances += 1;
                    st.generation_failures += 1;
                    st.fail(Failure {
                        index,
                        seed: config.seed,
                        reason,
                        lhs: Real(f64::NAN),
                        rhs: Real(f64::NAN),
                        scenario: None,
                    });
                }
            }
        }
    }
    let total_failures = stats.values().map(|s| s.failure_count).sum();
    Ok((
        CampaignReport {
            seed: config.seed,
            config: config.clone(),
            theorems: stats,
            total_failures,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
        rows,
    ))
}

pub fn write_csv<W: std::io::Write>(rows: &[BoundRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DeltaClass;

    fn small(theorems: &[&str]) -> EnsembleConfig {
        EnsembleConfig {
            count: 12,
            n_range: [2, 5],
            rank_range: [1, 4],
            seed: 42,
            theorems: theorems.iter().map(|s| s.to_string()).collect(),
            ..EnsembleConfig::default()
        }
    }

    #[test]
    fn single_zero_magnitude_instance() {
        let c = EnsembleConfig {
            count: 1,
            perturbation_magnitudes: vec![0.0],
            delta_classes: vec![DeltaClass::Generic],
            ..small(&["update-formula"])
        };
        let (r, _) = run_campaign(&c).unwrap();
        let st = &r.theorems[&Theorem::UpdateFormula];
        assert_eq!((st.instances, st.consistent), (1, 1));
        assert!(r.clean());
    }

    #[test]
    fn deterministic_reports() {
        let c = small(&["p-bound", "stable-equivalence", "duality"]);
        let (a, rows_a) = run_campaign(&c).unwrap();
        let (b, rows_b) = run_campaign(&c).unwrap();
        assert_eq!(a.reproducible(), b.reproducible());
        assert_eq!(
            serde_json::to_string(&a.reproducible()).unwrap(),
            serde_json::to_string(&b.reproducible()).unwrap()
        );
        assert_eq!(rows_a, rows_b);
        assert!(a.clean(), "{:#?}", a.theorems);
    }

    #[test]
    fn injected_false_bound_is_caught() {
        let c = EnsembleConfig {
            rhs_divisor: 1e6,
            perturbation_magnitudes: vec![0.5],
            ..small(&["p-bound"])
        };
        let (r, rows) = run_campaign(&c).unwrap();
        assert!(!r.clean());
        assert!(r.theorems[&Theorem::PBound].failure_count > 0);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theorem,n,kappa,hyp,lhs,rhs,margin\n"));
        assert!(text.contains("p-bound,"));
    }

    #[test]
    fn report_round_trips_through_json() {
        let (r, _) = run_campaign(&small(&["defining", "q-bound"])).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: CampaignReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
