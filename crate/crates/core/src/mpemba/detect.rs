//! Sign-change detection between two sampled curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Source of paired samples `(f(t), g(t))`.
///
/// `at_grid` is called for points of the uniform grid `t = t_max·j/n` and
/// lets implementations serve cached values; bisection always uses `at`.
pub trait PairSampler {
    fn at(&self, t: f64) -> (f64, f64);

    fn at_grid(&self, j: usize, n: usize, t: f64) -> (f64, f64) {
        let _ = (j, n);
        self.at(t)
    }

    /// Every value on the `n`-interval grid at once, for samplers that can
    /// beat point-by-point evaluation. Must agree exactly with `at_grid`.
    fn fill_grid(&self, n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let _ = n;
        None
    }
}

/// Adapter for two plain closures.
pub struct FnPair<F, G>(pub F, pub G);

impl<F: Fn(f64) -> f64, G: Fn(f64) -> f64> PairSampler for FnPair<F, G> {
    fn at(&self, t: f64) -> (f64, f64) {
        ((self.0)(t), (self.1)(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Zero,
    Odd,
    Even,
}

impl Parity {
    pub fn of(count: usize) -> Self {
        match count {
            0 => Parity::Zero,
            c if c % 2 == 1 => Parity::Odd,
            _ => Parity::Even,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub crossing_times: Vec<f64>,
    pub count: usize,
    pub parity: Parity,
    pub mpemba_parameter: f64,
    /// Parallel to `crossing_times`; set when the curves lingered within
    /// the zero tolerance around the crossing.
    pub tangency_flags: Vec<bool>,
    /// Touches without a sign change. Not counted as crossings.
    pub tangency_times: Vec<f64>,
    pub t_max: f64,
    /// Grid intervals of the final sampling level.
    pub intervals: usize,
    /// False when the count still changed at the finest allowed grid.
    pub converged: bool,
    pub tail_extensions: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingDetector {
    pub initial_intervals: usize,
    pub max_intervals: usize,
    /// Samples with `|f − g| ≤ zero_tol·max(|f|, |g|)` carry no sign.
    pub zero_tol: f64,
    /// Initial values closer than this are rejected as unordered.
    pub ambiguity_tol: f64,
    /// Bisection stops at this bracket width; default `1e-12·t_max`.
    pub refine_tol: Option<f64>,
}

impl Default for CrossingDetector {
    fn default() -> Self {
        CrossingDetector {
            initial_intervals: 2048,
            max_intervals: 1 << 20,
            zero_tol: 1e-12,
            ambiguity_tol: 1e-12,
            refine_tol: None,
        }
    }
}

struct Level {
    n: usize,
    f: Vec<f64>,
    g: Vec<f64>,
}

struct Analysis {
    /// (left index, right index, grazing)
    brackets: Vec<(usize, usize, bool)>,
    /// zero runs bounded by equal signs, as index ranges
    touches: Vec<(usize, usize)>,
    end_sign: i8,
}

pub(crate) struct Detection {
    pub report: CrossingReport,
    pub end_sign: i8,
}

fn check(v: (f64, f64), t: f64) -> Result<(f64, f64)> {
    if v.0.is_nan() || v.1.is_nan() {
        return Err(Error::Numeric(format!("curve evaluated to NaN at t = {t}")));
    }
    Ok(v)
}

/// Split the trapezoid of a linear segment into the parts above and
/// below zero.
pub(crate) fn split_area(h: f64, a: f64, b: f64) -> (f64, f64) {
    if a >= 0.0 && b >= 0.0 {
        (0.5 * (a + b) * h, 0.0)
    } else if a <= 0.0 && b <= 0.0 {
        (0.0, -0.5 * (a + b) * h)
    } else {
        let tz = h * a.abs() / (a.abs() + b.abs());
        if a > 0.0 {
            (0.5 * a * tz, -0.5 * b * (h - tz))
        } else {
            (0.5 * b * (h - tz), -0.5 * a * tz)
        }
    }
}

impl CrossingDetector {
    fn time(t_max: f64, j: usize, n: usize) -> f64 {
        t_max * j as f64 / n as f64
    }

    /// Level `n` read off a precomputed finer grid.
    fn strided(fine: &Level, n: usize) -> Option<Level> {
        if n > fine.n || !fine.n.is_multiple_of(n) {
            return None;
        }
        let step = fine.n / n;
        Some(Level {
            n,
            f: fine.f.iter().step_by(step).copied().collect(),
            g: fine.g.iter().step_by(step).copied().collect(),
        })
    }

    fn prefill<S: PairSampler + ?Sized>(&self, s: &S, t_max: f64) -> Result<Option<Level>> {
        // the first three levels settle the count in the common case
        let n = self.initial_intervals * 4;
        if n > self.max_intervals {
            return Ok(None);
        }
        let Some((f, g)) = s.fill_grid(n) else {
            return Ok(None);
        };
        debug_assert!(f.len() == n + 1 && g.len() == n + 1);
        if let Some(k) = (0..=n).find(|&k| f[k].is_nan() || g[k].is_nan()) {
            check((f[k], g[k]), Self::time(t_max, k, n))?;
        }
        Ok(Some(Level { n, f, g }))
    }

    fn sample<S: PairSampler + ?Sized>(&self, s: &S, t_max: f64, n: usize) -> Result<Level> {
        let mut f = Vec::with_capacity(n + 1);
        let mut g = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let t = Self::time(t_max, j, n);
            let v = check(s.at_grid(j, n, t), t)?;
            f.push(v.0);
            g.push(v.1);
        }
        Ok(Level { n, f, g })
    }

    fn refine_level<S: PairSampler + ?Sized>(&self, s: &S, t_max: f64, lvl: Level) -> Result<Level> {
        let n = lvl.n * 2;
        let mut f = Vec::with_capacity(n + 1);
        let mut g = Vec::with_capacity(n + 1);
        for j in 0..=lvl.n {
            f.push(lvl.f[j]);
            g.push(lvl.g[j]);
            if j < lvl.n {
                let k = 2 * j + 1;
                let t = Self::time(t_max, k, n);
                let v = check(s.at_grid(k, n, t), t)?;
                f.push(v.0);
                g.push(v.1);
            }
        }
        Ok(Level { n, f, g })
    }

    /// Per-sample sign of `f − g`, zero inside the tolerance band.
    fn signs(&self, lvl: &Level) -> Vec<i8> {
        lvl.f
            .iter()
            .zip(&lvl.g)
            .map(|(&f, &g)| {
                let d = f - g;
                let (fa, ga) = (f.abs(), g.abs());
                let tol = self.zero_tol * if fa > ga { fa } else { ga };
                (d > tol) as i8 - (d < -tol) as i8
            })
            .collect()
    }

    /// Brackets and touches on every `step`-th sign; indices are in units
    /// of the coarse level.
    fn analyse(signs: &[i8], step: usize) -> Analysis {
        let strided: Vec<i8>;
        let c: &[i8] = if step == 1 {
            signs
        } else {
            strided = signs.iter().step_by(step).copied().collect();
            &strided
        };
        let mut brackets = Vec::new();
        let mut touches = Vec::new();
        let mut last: Option<(usize, i8)> = None;
        let mut zero_run: Option<usize> = None;
        let mut k = 0;
        // walk runs of equal sign
        while k < c.len() {
            let (v, start) = (c[k], k);
            while k + 1 < c.len() && c[k + 1] == v {
                k += 1;
            }
            if v == 0 {
                zero_run = Some(start);
            } else {
                if let Some((i, ls)) = last {
                    if ls != v {
                        brackets.push((i, start, zero_run.is_some()));
                    } else if let Some(z0) = zero_run {
                        touches.push((z0, start - 1));
                    }
                }
                last = Some((k, v));
                zero_run = None;
            }
            k += 1;
        }
        Analysis {
            brackets,
            touches,
            end_sign: last.map_or(0, |(_, s)| s),
        }
    }

    fn bisect<S: PairSampler + ?Sized>(&self, s: &S, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
        let (f, g) = check(s.at(lo), lo)?;
        let s_lo = (f - g).signum();
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (f, g) = check(s.at(mid), mid)?;
            let d = f - g;
            if d == 0.0 {
                return Ok(mid);
            }
            if d.signum() == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Area fraction on the far side of the initial ordering.
    fn area_fraction(lvl: &Level, t_max: f64) -> f64 {
        let s0 = (lvl.f[0] - lvl.g[0]).signum();
        let h = t_max / lvl.n as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..lvl.n {
            let a = s0 * (lvl.f[k] - lvl.g[k]);
            let b = s0 * (lvl.f[k + 1] - lvl.g[k + 1]);
            let (pos, neg) = split_area(h, a, b);
            num += neg;
            den += pos + neg;
        }
        if den > 0.0 {
            (num / den).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub(crate) fn run<S: PairSampler + ?Sized>(&self, s: &S, t_max: f64) -> Result<Detection> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::domain(format!("t_max = {t_max} must be positive and finite")));
        }
        if self.initial_intervals < 2 || self.max_intervals < self.initial_intervals {
            return Err(Error::domain("detector grid sizes are inconsistent"));
        }
        let (f0, g0) = check(s.at(0.0), 0.0)?;
        let gap = (f0 - g0).abs();
        if gap <= self.ambiguity_tol {
            return Err(Error::AmbiguousOrdering { gap });
        }

        // With a prefilled fine grid the coarser levels are read off its
        // signs; past it, levels are refined sample by sample.
        let mut fine = self.prefill(s, t_max)?;
        let fine_signs = fine.as_ref().map(|l| self.signs(l));
        let covered = |fine: &Option<Level>, n: usize| fine.as_ref().is_some_and(|l| n <= l.n && l.n % n == 0);
        let mut n = self.initial_intervals;
        let mut lvl = if covered(&fine, n) {
            None
        } else {
            Some(self.sample(s, t_max, n)?)
        };
        let mut counts = Vec::new();
        let mut converged = false;
        let mut analysis;
        loop {
            analysis = match &lvl {
                Some(l) => Self::analyse(&self.signs(l), 1),
                None => {
                    let fl = fine.as_ref().expect("covered level");
                    Self::analyse(fine_signs.as_deref().expect("signs of the fine level"), fl.n / n)
                }
            };
            counts.push(analysis.brackets.len());
            let k = counts.len();
            if k >= 3 && counts[k - 1] == counts[k - 2] && counts[k - 2] == counts[k - 3] {
                converged = true;
                break;
            }
            if n * 2 > self.max_intervals {
                break;
            }
            n *= 2;
            if !covered(&fine, n) {
                let base = match lvl.take() {
                    Some(l) => l,
                    None => match fine.take() {
                        Some(fl) if fl.n == n / 2 => fl,
                        Some(fl) => Self::strided(&fl, n / 2).expect("covered level"),
                        None => unreachable!("uncovered level without samples"),
                    },
                };
                lvl = Some(self.refine_level(s, t_max, base)?);
            }
        }
        let lvl = match lvl {
            Some(l) => l,
            None => {
                let fl = fine.expect("covered level");
                if fl.n == n {
                    fl
                } else {
                    Self::strided(&fl, n).expect("covered level")
                }
            }
        };
        if !converged && counts.len() < 3 {
            // grid too small to refine twice; trust the last level if stable
            converged = counts.windows(2).all(|w| w[0] == w[1]);
        }

        let tol = self.refine_tol.unwrap_or(1e-12 * t_max.max(1.0));
        let mut crossing_times = Vec::with_capacity(analysis.brackets.len());
        let mut tangency_flags = Vec::with_capacity(analysis.brackets.len());
        for &(i, j, grazing) in &analysis.brackets {
            let lo = Self::time(t_max, i, lvl.n);
            let hi = Self::time(t_max, j, lvl.n);
            crossing_times.push(self.bisect(s, lo, hi, tol)?);
            tangency_flags.push(grazing);
        }
        let tangency_times = analysis
            .touches
            .iter()
            .map(|&(a, b)| 0.5 * (Self::time(t_max, a, lvl.n) + Self::time(t_max, b, lvl.n)))
            .collect();
        let count = crossing_times.len();
        let mpemba_parameter = if count == 0 {
            0.0
        } else {
            Self::area_fraction(&lvl, t_max)
        };
        Ok(Detection {
            report: CrossingReport {
                crossing_times,
                count,
                parity: Parity::of(count),
                mpemba_parameter,
                tangency_flags,
                tangency_times,
                t_max,
                intervals: lvl.n,
                converged,
                tail_extensions: 0,
            },
            end_sign: analysis.end_sign,
        })
    }

    pub fn detect<S: PairSampler + ?Sized>(&self, s: &S, t_max: f64) -> Result<CrossingReport> {
        Ok(self.run(s, t_max)?.report)
    }
}

/// All sign changes of `f − g` on `(0, t_max]` with the default detector,
/// each refined to a bracket of width `refine_tol`.
pub fn detect_crossings<F, G>(f: F, g: G, t_max: f64, refine_tol: f64) -> Result<CrossingReport>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(refine_tol > 0.0) {
        return Err(Error::domain("refine_tol must be positive"));
    }
    let det = CrossingDetector {
        refine_tol: Some(refine_tol),
        ..CrossingDetector::default()
    };
    det.detect(&FnPair(f, g), t_max)
}
