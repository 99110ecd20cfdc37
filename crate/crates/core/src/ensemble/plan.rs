use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of hourly horizons the compound forecaster covers.
pub const HORIZONS: usize = 24;

/// Horizon whose ensemble feeds the residual-corrected route by default.
pub const DEFAULT_SOURCE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Average,
    Marginal,
}

impl fmt::Display for ResponseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResponseKind::Average => "average",
            ResponseKind::Marginal => "marginal",
        })
    }
}

impl FromStr for ResponseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(ResponseKind::Average),
            "marginal" => Ok(ResponseKind::Marginal),
            _ => Err(Error::Config(format!(
                "response kind must be `average` or `marginal`, got `{s}`"
            ))),
        }
    }
}

/// How one horizon is forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// The ensemble fitted for this horizon.
    Ensemble,
    /// The source-horizon ensemble issued from an earlier origin, plus the
    /// residual model's forecast.
    Corrected,
    /// The source-horizon ensemble from an earlier origin, without correction.
    Uncorrected,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Ensemble => "ensemble",
            Route::Corrected => "corrected",
            Route::Uncorrected => "uncorrected",
        })
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ensemble" => Ok(Route::Ensemble),
            "corrected" => Ok(Route::Corrected),
            "uncorrected" => Ok(Route::Uncorrected),
            _ => Err(Error::Config(format!("unknown route `{s}`"))),
        }
    }
}

/// Route for every horizon `1..=24`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HorizonPlan {
    /// Horizon of the ensemble behind the corrected and uncorrected routes.
    pub source: usize,
    /// `routes[h − 1]` is the route of horizon `h`.
    pub routes: Vec<Route>,
}

impl HorizonPlan {
    /// The default plan for a response kind.
    pub fn for_kind(kind: ResponseKind) -> Self {
        let corrected = match kind {
            ResponseKind::Average => 3..=6,
            ResponseKind::Marginal => 1..=6,
        };
        let routes = (1..=HORIZONS)
            .map(|h| {
                if corrected.contains(&h) {
                    Route::Corrected
                } else {
                    Route::Ensemble
                }
            })
            .collect();
        Self {
            source: DEFAULT_SOURCE,
            routes,
        }
    }

    /// Parses `1-2:ensemble,3-6:corrected,7-24:ensemble`. Every horizon must
    /// be covered exactly once.
    pub fn parse(text: &str, source: usize) -> Result<Self> {
        let mut routes: Vec<Option<Route>> = vec![None; HORIZONS];
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (range, route) = part
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("plan entry `{part}` is not `range:route`")))?;
            let route: Route = route.trim().parse()?;
            let (a, b) = match range.split_once('-') {
                Some((a, b)) => (a, b),
                None => (range, range),
            };
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad horizon `{s}` in plan entry `{part}`")))
            };
            let (a, b) = (parse(a)?, parse(b)?);
            if a == 0 || b > HORIZONS || a > b {
                return Err(Error::Config(format!("plan range `{range}` is outside 1..=24")));
            }
            for h in a..=b {
                if routes[h - 1].replace(route).is_some() {
                    return Err(Error::Config(format!("horizon {h} appears twice in the plan")));
                }
            }
        }
        if let Some(h) = routes.iter().position(Option::is_none) {
            return Err(Error::Config(format!("horizon {} has no route in the plan", h + 1)));
        }
        let plan = Self {
            source,
            routes: routes.into_iter().map(Option::unwrap).collect(),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.routes.len() != HORIZONS {
            return Err(Error::Config(format!(
                "plan must route {HORIZONS} horizons, got {}",
                self.routes.len()
            )));
        }
        if self.source == 0 || self.source > HORIZONS {
            return Err(Error::Config(format!("source horizon {} is outside 1..=24", self.source)));
        }
        for h in 1..=HORIZONS {
            if self.route(h) != Route::Ensemble && h > self.source {
                return Err(Error::Config(format!(
                    "horizon {h} cannot reuse the h={} ensemble: its origin would lie after the forecast time",
                    self.source
                )));
            }
        }
        Ok(())
    }

    pub fn route(&self, h: usize) -> Route {
        self.routes[h - 1]
    }

    pub fn needs_source(&self) -> bool {
        self.routes.iter().any(|r| *r != Route::Ensemble)
    }

    pub fn needs_corrector(&self) -> bool {
        self.routes.contains(&Route::Corrected)
    }

    /// Horizons that need their own fitted ensemble, ascending.
    pub fn ensemble_horizons(&self) -> Vec<usize> {
        (1..=HORIZONS)
            .filter(|&h| self.route(h) == Route::Ensemble || (h == self.source && self.needs_source()))
            .collect()
    }

    /// Maximal runs of horizons sharing a route.
    pub fn runs(&self) -> Vec<(RangeInclusive<usize>, Route)> {
        let mut out: Vec<(RangeInclusive<usize>, Route)> = Vec::new();
        for h in 1..=HORIZONS {
            let r = self.route(h);
            match out.last_mut() {
                Some((range, last)) if *last == r => *range = *range.start()..=h,
                _ => out.push((h..=h, r)),
            }
        }
        out
    }
}

impl fmt::Display for HorizonPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .runs()
            .into_iter()
            .map(|(r, route)| {
                if r.start() == r.end() {
                    format!("{}:{route}", r.start())
                } else {
                    format!("{}-{}:{route}", r.start(), r.end())
                }
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}
