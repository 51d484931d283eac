//! Monte Carlo drop engine and distance sweeps.
//!
//! Randomness is split per work unit: drop `i` of a run seeded with `s`
//! draws from `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`, and
//! sweep distance `j` likewise uses stream `j`. Work units are evaluated in
//! parallel and collected in index order, so results do not depend on the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{LinkBudget, LinkSample};
use crate::layout::{build_layout, link_geometry, sample_ue, Layout, LinkGeometry, Point2, UeDrop};
use crate::profiles::{ExposureLimits, SystemProfile};
use crate::protocol::{
    attach_once, select_baseline, AttachmentOutcome, CandidateReport, Phase, ProtocolConfig,
    DEFAULT_UPDATE_PERIOD,
};
use crate::stats::{EmpiricalDistribution, MeanEstimate, Metric};
use crate::{Error, Result};

/// Drops handed to the worker pool at a time; bounds peak memory.
const DROP_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Baseline,
    Constrained,
}

impl Policy {
    pub const ALL: [Policy; 2] = [Policy::Baseline, Policy::Constrained];

    pub fn tag(self) -> &'static str {
        match self {
            Policy::Baseline => "baseline",
            Policy::Constrained => "constrained",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Policy::Baseline),
            "constrained" => Ok(Policy::Constrained),
            other => Err(Error::InvalidConfig(format!("unknown policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub profile: SystemProfile,
    pub num_drops: usize,
    pub ues_per_sector: usize,
    pub policies: Vec<Policy>,
    /// PD threshold of the constrained policy, W/m².
    pub gamma: f64,
    pub seed: u64,
    /// Only record UEs dropped in the center site's sectors.
    pub center_only: bool,
    /// Overrides the profile's ring count.
    pub rings: Option<u32>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub limits: ExposureLimits,
    pub update_period: u32,
}

impl RunConfig {
    pub fn new(profile: SystemProfile) -> Self {
        let limits = ExposureLimits::default();
        RunConfig {
            profile,
            num_drops: 10_000,
            ues_per_sector: 10,
            policies: Policy::ALL.to_vec(),
            gamma: limits.pd_limit,
            seed: 0,
            center_only: false,
            rings: None,
            threads: None,
            limits,
            update_period: DEFAULT_UPDATE_PERIOD,
        }
    }

    pub fn rings(&self) -> u32 {
        self.rings.unwrap_or(self.profile.default_rings)
    }

    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        self.limits.validate()?;
        if self.num_drops == 0 {
            return Err(Error::InvalidConfig("num_drops must be at least 1".into()));
        }
        if self.ues_per_sector == 0 {
            return Err(Error::InvalidConfig(
                "ues_per_sector must be at least 1".into(),
            ));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one policy is required".into(),
            ));
        }
        if self.update_period == 0 {
            return Err(Error::InvalidConfig(
                "update period must be at least 1 tick".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        if self.rings() > 2 {
            return Err(Error::UnsupportedRings(self.rings()));
        }
        Ok(())
    }
}

/// Random stream for work unit `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Per-UE outcome under both policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeOutcome {
    pub ue: UeDrop,
    pub baseline: AttachmentOutcome,
    pub constrained: AttachmentOutcome,
}

impl UeOutcome {
    pub fn get(&self, policy: Policy) -> &AttachmentOutcome {
        match policy {
            Policy::Baseline => &self.baseline,
            Policy::Constrained => &self.constrained,
        }
    }
}

/// Evaluates drops of one configuration.
#[derive(Debug, Clone)]
pub struct DropEngine {
    pub layout: Layout,
    pub budget: LinkBudget,
    protocol: ProtocolConfig,
    ue_height_m: f64,
    ues_per_sector: usize,
    seed: u64,
    center_only: bool,
}

impl DropEngine {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(DropEngine {
            layout: build_layout(&config.profile, config.rings())?,
            budget: LinkBudget::new(&config.profile),
            protocol: ProtocolConfig {
                gamma: config.gamma,
                update_period: config.update_period,
            },
            ue_height_m: config.profile.ue_height_m,
            ues_per_sector: config.ues_per_sector,
            seed: config.seed,
            center_only: config.center_only,
        })
    }

    /// UE positions of drop `index`, `ues_per_sector` per sector in sector
    /// order. The stream consumption does not depend on `center_only`.
    pub fn sample_drop(&self, index: u64) -> Vec<UeDrop> {
        let mut rng = substream(self.seed, index);
        let mut ues = Vec::with_capacity(self.layout.sectors.len() * self.ues_per_sector);
        for sector in &self.layout.sectors {
            for _ in 0..self.ues_per_sector {
                ues.push(sample_ue(sector, self.ue_height_m, &mut rng));
            }
        }
        if self.center_only {
            ues.retain(|ue| self.layout.sector(ue.home_sector).site_index == 0);
        }
        ues
    }

    /// Links from every sector of the layout to `ue`, in sector order.
    pub fn links(&self, ue: &UeDrop) -> Vec<LinkSample> {
        self.layout
            .sectors
            .iter()
            .map(|s| self.budget.evaluate(s.id, &link_geometry(s, ue)))
            .collect()
    }

    pub fn decide(&self, ue: UeDrop, links: &[LinkSample]) -> Result<UeOutcome> {
        let candidates: Vec<CandidateReport> = links.iter().map(CandidateReport::from).collect();
        let baseline_id = select_baseline(&candidates)?;
        let baseline = AttachmentOutcome::served(&links[baseline_id.0], 0);
        let state = attach_once(&candidates, &self.protocol)?;
        let constrained = match (state.phase, state.serving) {
            (Phase::Attached, Some(id)) => {
                AttachmentOutcome::served(&links[id.0], state.handover_count)
            }
            _ => AttachmentOutcome::outage(state.handover_count),
        };
        Ok(UeOutcome {
            ue,
            baseline,
            constrained,
        })
    }

    pub fn evaluate_drop(&self, index: u64) -> Result<Vec<UeOutcome>> {
        self.sample_drop(index)
            .into_iter()
            .map(|ue| {
                let links = self.links(&ue);
                self.decide(ue, &links)
            })
            .collect()
    }
}

/// Aggregated statistics of one policy over a run.
#[derive(Debug, Clone)]
pub struct PolicyResults {
    pub policy: Policy,
    /// Experienced PD of served UEs.
    pub pd: EmpiricalDistribution,
    /// Experienced SAR of served UEs.
    pub sar: EmpiricalDistribution,
    /// Rate of every UE; outage contributes 0.
    pub rate: EmpiricalDistribution,
    pub num_ues: usize,
    pub outages: usize,
    pub handovers: u64,
}

impl PolicyResults {
    pub fn distribution(&self, metric: Metric) -> &EmpiricalDistribution {
        match metric {
            Metric::Pd => &self.pd,
            Metric::Sar => &self.sar,
            Metric::Rate => &self.rate,
        }
    }

    pub fn outage_fraction(&self) -> f64 {
        self.outages as f64 / self.num_ues as f64
    }

    pub fn mean_handovers(&self) -> f64 {
        self.handovers as f64 / self.num_ues as f64
    }

    pub fn served(&self) -> usize {
        self.num_ues - self.outages
    }
}

#[derive(Debug, Clone)]
pub struct RunResults {
    pub config: RunConfig,
    pub policies: Vec<PolicyResults>,
}

impl RunResults {
    pub fn policy(&self, policy: Policy) -> Option<&PolicyResults> {
        self.policies.iter().find(|p| p.policy == policy)
    }
}

#[derive(Default)]
struct Accumulator {
    pd: Vec<f64>,
    sar: Vec<f64>,
    rate: Vec<f64>,
    num_ues: usize,
    outages: usize,
    handovers: u64,
}

impl Accumulator {
    fn push(&mut self, outcome: &AttachmentOutcome) {
        self.num_ues += 1;
        self.handovers += u64::from(outcome.handover_count);
        self.rate.push(outcome.rate_bps);
        if outcome.is_outage() {
            self.outages += 1;
        } else {
            self.pd.push(outcome.experienced_pd);
            self.sar.push(outcome.experienced_sar);
        }
    }

    fn finish(self, policy: Policy) -> PolicyResults {
        PolicyResults {
            policy,
            pd: EmpiricalDistribution::new(Metric::Pd, self.pd),
            sar: EmpiricalDistribution::new(Metric::Sar, self.sar),
            rate: EmpiricalDistribution::new(Metric::Rate, self.rate),
            num_ues: self.num_ues,
            outages: self.outages,
            handovers: self.handovers,
        }
    }
}

/// Runs `f` on a dedicated pool when a thread count is given.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn run_drops(config: &RunConfig) -> Result<RunResults> {
    let engine = DropEngine::new(config)?;
    let mut policies = config.policies.clone();
    policies.sort_by_key(|p| *p as u8);
    policies.dedup();
    let mut accumulators: Vec<Accumulator> =
        policies.iter().map(|_| Accumulator::default()).collect();

    with_threads(config.threads, || -> Result<()> {
        let drops = config.num_drops as u64;
        let mut start = 0u64;
        while start < drops {
            let end = (start + DROP_CHUNK as u64).min(drops);
            let chunk: Vec<Vec<UeOutcome>> = (start..end)
                .into_par_iter()
                .map(|i| engine.evaluate_drop(i))
                .collect::<Result<_>>()?;
            for outcome in chunk.iter().flatten() {
                for (acc, policy) in accumulators.iter_mut().zip(&policies) {
                    acc.push(outcome.get(*policy));
                }
            }
            start = end;
        }
        Ok(())
    })??;

    Ok(RunResults {
        config: config.clone(),
        policies: accumulators
            .into_iter()
            .zip(policies)
            .map(|(acc, policy)| acc.finish(policy))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub distances: Vec<f64>,
    /// Azimuth samples per distance.
    pub samples_per_distance: usize,
    pub seed: u64,
}

impl SweepConfig {
    /// Grid `dmin, dmin + step, ...` up to and including `dmax`.
    pub fn grid(dmin: f64, dmax: f64, step: f64) -> Result<Vec<f64>> {
        if !(dmin > 0.0 && dmax >= dmin && step > 0.0 && dmax.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "invalid sweep grid dmin={dmin} dmax={dmax} step={step}"
            )));
        }
        let count = ((dmax - dmin) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| dmin + step * i as f64).collect())
    }

    pub fn new(distances: Vec<f64>) -> Self {
        SweepConfig {
            distances,
            samples_per_distance: 4000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub distance_m: f64,
    pub pd: MeanEstimate,
    pub sar: MeanEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub generation: crate::profiles::Generation,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Distance at which the mean PD first drops from `>= threshold` to
    /// below it, interpolated linearly in log-PD between grid points. `None`
    /// when no such transition occurs on the grid.
    pub fn crossing_distance(&self, threshold: f64) -> Option<f64> {
        self.rows.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if a.pd.mean >= threshold && b.pd.mean < threshold {
                let (la, lb, lt) = (a.pd.mean.ln(), b.pd.mean.ln(), threshold.ln());
                let t = if la == lb { 0.0 } else { (la - lt) / (la - lb) };
                Some(a.distance_m + t * (b.distance_m - a.distance_m))
            } else {
                None
            }
        })
    }

    pub fn below_everywhere(&self, threshold: f64) -> bool {
        self.rows.iter().all(|r| r.pd.mean < threshold)
    }
}

/// Mean PD and SAR from one sector's transmitter versus planar distance,
/// averaged over the azimuths at that range that fall inside the sector.
pub fn distance_sweep(profile: &SystemProfile, sweep: &SweepConfig) -> Result<SweepTable> {
    profile.validate()?;
    if sweep.samples_per_distance == 0 {
        return Err(Error::InvalidConfig(
            "samples_per_distance must be at least 1".into(),
        ));
    }
    let layout = build_layout(profile, 0)?;
    let sector = &layout.sectors[0];
    let budget = LinkBudget::new(profile);
    let dh = sector.antenna_height_m - profile.ue_height_m;
    let half_width = 180.0 / f64::from(profile.sectors_per_site);
    let max_attempts = 1000 * sweep.samples_per_distance;

    let rows = sweep
        .distances
        .par_iter()
        .enumerate()
        .map(|(j, &d)| {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::NonFiniteDistance(d));
            }
            let mut rng = substream(sweep.seed, j as u64);
            let mut pd = Vec::with_capacity(sweep.samples_per_distance);
            let mut sar = Vec::with_capacity(sweep.samples_per_distance);
            let mut attempts = 0;
            while pd.len() < sweep.samples_per_distance {
                attempts += 1;
                if attempts > max_attempts {
                    return Err(Error::OutsideSector { distance: d });
                }
                let phi = rng.random_range(-half_width..=half_width);
                let a = (sector.boresight_azimuth_deg + phi).to_radians();
                let p = Point2::new(
                    sector.bs_position.x + d * a.cos(),
                    sector.bs_position.y + d * a.sin(),
                );
                if !sector.region.contains(p) {
                    continue;
                }
                let link = budget.evaluate(sector.id, &LinkGeometry::at(d, phi, dh));
                pd.push(link.pd);
                sar.push(link.sar);
            }
            Ok(SweepRow {
                distance_m: d,
                pd: MeanEstimate::from_samples(&pd),
                sar: MeanEstimate::from_samples(&sar),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        generation: profile.generation,
        rows,
    })
}
