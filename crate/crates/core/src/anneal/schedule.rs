use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub s: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

/// Piecewise-linear driver and problem weights `A(s)`, `B(s)` over `s in [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    points: Vec<SchedulePoint>,
    /// Nominal anneal time in microseconds. Engines run in sweeps and only
    /// carry this along.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anneal_time_us: Option<f64>,
}

impl Default for AnnealSchedule {
    /// `A(s) = 1 - s`, `B(s) = s`.
    fn default() -> Self {
        Self {
            points: vec![
                SchedulePoint { s: 0.0, a: 1.0, b: 0.0 },
                SchedulePoint { s: 1.0, a: 0.0, b: 1.0 },
            ],
            anneal_time_us: None,
        }
    }
}

impl AnnealSchedule {
    /// Schedule satisfying the annealing endpoint conditions: the driver
    /// dominates at `s = 0` (`A > 0`) and vanishes at `s = 1`, where `B > 0`.
    pub fn new(points: Vec<SchedulePoint>) -> Result<Self> {
        let sched = Self::custom(points)?;
        let (first, last) = (sched.points[0], sched.points[sched.points.len() - 1]);
        if !(first.a > 0.0) || last.a != 0.0 || !(last.b > 0.0) {
            return Err(Error::Parameter(format!(
                "schedule needs A(0) > 0, A(1) = 0 and B(1) > 0; got A(0)={}, A(1)={}, B(1)={}",
                first.a, last.a, last.b
            )));
        }
        Ok(sched)
    }

    /// Schedule checked only for shape: `s` strictly increasing from 0 to 1,
    /// `A` and `B` finite and non-negative. Used for diagnostics such as a
    /// driver that is off throughout.
    pub fn custom(points: Vec<SchedulePoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parameter("schedule needs at least two points".into()));
        }
        if points[0].s != 0.0 || points[points.len() - 1].s != 1.0 {
            return Err(Error::Parameter("schedule must start at s = 0 and end at s = 1".into()));
        }
        if points.windows(2).any(|w| !(w[0].s < w[1].s)) {
            return Err(Error::Parameter("schedule s values must be strictly increasing".into()));
        }
        if let Some(p) = points
            .iter()
            .find(|p| !(p.a >= 0.0 && p.b >= 0.0 && p.a.is_finite() && p.b.is_finite()))
        {
            return Err(Error::Parameter(format!(
                "schedule weights must be finite and non-negative, got A={} B={} at s={}",
                p.a, p.b, p.s
            )));
        }
        Ok(Self {
            points,
            anneal_time_us: None,
        })
    }

    /// Parses CSV rows `s,A,B`; a header row is optional.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut points = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if line == 0 && record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("s")) {
                continue;
            }
            if record.len() != 3 {
                return Err(Error::input(format!(
                    "schedule row {} has {} fields, expected 3",
                    line + 1,
                    record.len()
                )));
            }
            let field = |i: usize| {
                record[i]
                    .parse::<f64>()
                    .map_err(|_| Error::input(format!("schedule row {}: `{}` is not a number", line + 1, &record[i])))
            };
            points.push(SchedulePoint {
                s: field(0)?,
                a: field(1)?,
                b: field(2)?,
            });
        }
        Self::new(points)
    }

    pub fn points(&self) -> &[SchedulePoint] {
        &self.points
    }

    /// `(A(s), B(s))` by linear interpolation; `s` is clamped to `[0, 1]`.
    pub fn at(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let k = self
            .points
            .partition_point(|p| p.s <= s)
            .clamp(1, self.points.len() - 1);
        let (p, q) = (self.points[k - 1], self.points[k]);
        let t = (s - p.s) / (q.s - p.s);
        (p.a + t * (q.a - p.a), p.b + t * (q.b - p.b))
    }
}
