//! Serving-sector selection.
//!
//! Two policies are provided: the conventional strongest-RSS attachment and
//! the PD-constrained variant, which restricts the choice to the admissible
//! set `S = { i | PD_i < γ }` and picks the strongest RSS inside it. The
//! constrained policy also comes as an event-driven state machine covering
//! initial attachment, PD-triggered handover, periodic re-search and outage.

use serde::Serialize;

use crate::channel::LinkSample;
use crate::layout::SectorId;
use crate::{Error, Result};

/// Default re-search period, in ticks.
pub const DEFAULT_UPDATE_PERIOD: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateReport {
    pub sector: SectorId,
    pub rss_dbm: f64,
    /// PD this sector produces at the UE, W/m².
    pub pd: f64,
}

impl From<&LinkSample> for CandidateReport {
    fn from(s: &LinkSample) -> Self {
        CandidateReport {
            sector: s.sector,
            rss_dbm: s.rss_dbm,
            pd: s.pd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Serving {
    Sector(SectorId),
    Outage,
}

impl Serving {
    pub fn sector(self) -> Option<SectorId> {
        match self {
            Serving::Sector(id) => Some(id),
            Serving::Outage => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttachmentOutcome {
    pub serving: Serving,
    pub experienced_pd: f64,
    pub experienced_sar: f64,
    pub rate_bps: f64,
    pub handover_count: u32,
}

impl AttachmentOutcome {
    pub fn served(link: &LinkSample, handover_count: u32) -> Self {
        AttachmentOutcome {
            serving: Serving::Sector(link.sector),
            experienced_pd: link.pd,
            experienced_sar: link.sar,
            rate_bps: link.rate_bps,
            handover_count,
        }
    }

    pub fn outage(handover_count: u32) -> Self {
        AttachmentOutcome {
            serving: Serving::Outage,
            experienced_pd: 0.0,
            experienced_sar: 0.0,
            rate_bps: 0.0,
            handover_count,
        }
    }

    pub fn is_outage(&self) -> bool {
        self.serving == Serving::Outage
    }
}

/// Highest RSS; ties go to the lowest sector id.
fn strongest<'a>(
    candidates: impl IntoIterator<Item = &'a CandidateReport>,
) -> Option<&'a CandidateReport> {
    candidates
        .into_iter()
        .reduce(|best, c| match c.rss_dbm.total_cmp(&best.rss_dbm) {
            std::cmp::Ordering::Greater => c,
            std::cmp::Ordering::Equal if c.sector < best.sector => c,
            _ => best,
        })
}

/// Candidates with `pd < gamma`.
pub fn admissible(
    candidates: &[CandidateReport],
    gamma: f64,
) -> impl Iterator<Item = &CandidateReport> {
    candidates.iter().filter(move |c| c.pd < gamma)
}

pub fn select_baseline(candidates: &[CandidateReport]) -> Result<SectorId> {
    strongest(candidates)
        .map(|c| c.sector)
        .ok_or(Error::NoCandidates)
}

pub fn select_constrained(candidates: &[CandidateReport], gamma: f64) -> Result<Serving> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    check_gamma(gamma)?;
    Ok(strongest(admissible(candidates, gamma))
        .map_or(Serving::Outage, |c| Serving::Sector(c.sector)))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "gamma must be positive, got {gamma}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    /// PD threshold, W/m².
    pub gamma: f64,
    pub update_period: u32,
}

impl ProtocolConfig {
    pub fn new(gamma: f64) -> Self {
        ProtocolConfig {
            gamma,
            update_period: DEFAULT_UPDATE_PERIOD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Scanning,
    Attached,
    Handover,
    Outage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// One tick of the protocol clock.
    Tick,
    /// Fresh RSS/PD reports for the surrounding sectors.
    MeasurementUpdate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProtocolState {
    pub phase: Phase,
    pub serving: Option<SectorId>,
    /// Ticks until the forced re-search.
    pub timer: u32,
    pub handover_count: u32,
}

impl ProtocolState {
    pub fn initial(config: &ProtocolConfig) -> Self {
        ProtocolState {
            phase: Phase::Scanning,
            serving: None,
            timer: config.update_period,
            handover_count: 0,
        }
    }

    /// Completes a pending handover.
    pub fn settled(mut self) -> Self {
        if self.phase == Phase::Handover {
            self.phase = Phase::Attached;
        }
        self
    }

    fn move_to(mut self, target: SectorId) -> Self {
        match self.serving {
            Some(current) if current == target => {
                self.phase = Phase::Attached;
            }
            Some(_) => {
                self.serving = Some(target);
                self.phase = Phase::Handover;
                self.handover_count += 1;
            }
            None => {
                self.serving = Some(target);
                self.phase = Phase::Attached;
            }
        }
        self
    }

    fn to_outage(mut self) -> Self {
        self.serving = None;
        self.phase = Phase::Outage;
        self
    }

    /// Full BS search over the admissible set; resets the timer.
    fn research(mut self, candidates: &[CandidateReport], config: &ProtocolConfig) -> Result<Self> {
        self.timer = config.update_period;
        Ok(match select_constrained(candidates, config.gamma)? {
            Serving::Sector(target) => self.move_to(target),
            Serving::Outage => self.to_outage(),
        })
    }

    /// Checks the serving sector's PD and hands over when it violates γ.
    fn check_serving(self, candidates: &[CandidateReport], config: &ProtocolConfig) -> Self {
        let serving_pd = self
            .serving
            .and_then(|id| candidates.iter().find(|c| c.sector == id))
            .map(|c| c.pd);
        if matches!(serving_pd, Some(pd) if pd < config.gamma) {
            return self;
        }
        match strongest(admissible(candidates, config.gamma)) {
            Some(next) => self.move_to(next.sector),
            None => self.to_outage(),
        }
    }
}

/// Advances one UE's protocol state by one event.
pub fn step_state_machine(
    state: ProtocolState,
    candidates: &[CandidateReport],
    config: &ProtocolConfig,
    event: Event,
) -> Result<ProtocolState> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    check_gamma(config.gamma)?;
    let mut state = state.settled();
    match (state.phase, event) {
        (Phase::Scanning, _) => {
            state.serving = Some(select_baseline(candidates)?);
            state.phase = Phase::Attached;
            state.timer = config.update_period;
            Ok(state.check_serving(candidates, config))
        }
        (Phase::Attached, Event::MeasurementUpdate) => Ok(state.check_serving(candidates, config)),
        (Phase::Attached | Phase::Outage, Event::Tick) => {
            state.timer = state.timer.saturating_sub(1);
            if state.timer == 0 {
                state.research(candidates, config)
            } else {
                Ok(state)
            }
        }
        (Phase::Outage, Event::MeasurementUpdate) => Ok(state),
        (Phase::Handover, _) => unreachable!("settled above"),
    }
}

/// Runs one search cycle from a fresh state, as done for a static drop.
pub fn attach_once(
    candidates: &[CandidateReport],
    config: &ProtocolConfig,
) -> Result<ProtocolState> {
    let state = ProtocolState::initial(config);
    Ok(step_state_machine(state, candidates, config, Event::MeasurementUpdate)?.settled())
}
