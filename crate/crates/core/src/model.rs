//! Spherically homogeneous rooted trees of type `{L_n, k_n}`.
//!
//! A tree of this type branches into `k_n` forward neighbors at distance
//! `L_n` from the root and continues as a single path everywhere else.
//! Everything here works on finite prefixes of the two sequences plus an
//! explicit truncation depth.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest tree [`build_tree`] will materialize.
pub const MAX_TREE_VERTICES: u64 = 1 << 26;

/// The sequences `{L_n}` (branch positions) and `{k_n}` (branch factors).
///
/// Level indices are 1-based in the mathematical sense: `positions()[0]`
/// is `L_1`. Level 0 is the radial sector and has no branch of its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSpec {
    positions: Vec<u64>,
    factors: Vec<u64>,
    label: String,
}

impl TreeSpec {
    /// Validates `L = positions`, `k = factors`. `L_1 = 0` is rejected.
    pub fn new(positions: Vec<u64>, factors: Vec<u64>) -> Result<Self> {
        validate_spec(positions, factors, false)
    }

    /// The half-line graph: no branching at all.
    pub fn path() -> Self {
        TreeSpec {
            positions: Vec::new(),
            factors: Vec::new(),
            label: "path".to_string(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of branch levels `n >= 1` in the prefix.
    pub fn branch_levels(&self) -> usize {
        self.positions.len()
    }

    /// `R_0 = 0`, `R_n = L_n + 1`: the first sphere on which level `n` lives.
    pub fn level_radius(&self, n: usize) -> Result<u64> {
        match n {
            0 => Ok(0),
            _ if n <= self.positions.len() => {
                self.positions[n - 1].checked_add(1).ok_or(Error::Overflow {
                    what: "level radius",
                })
            }
            _ => Err(Error::LevelOutOfRange {
                level: n,
                available: self.positions.len() + 1,
            }),
        }
    }

    /// `alpha_n = k_1 ... k_n`, with `alpha_0 = 1`.
    pub fn alpha(&self, n: usize) -> Result<u64> {
        if n > self.factors.len() {
            return Err(Error::LevelOutOfRange {
                level: n,
                available: self.factors.len() + 1,
            });
        }
        self.factors[..n].iter().try_fold(1u64, |acc, &k| {
            acc.checked_mul(k)
                .ok_or(Error::Overflow { what: "alpha_n" })
        })
    }
}

impl fmt::Display for TreeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (L = {:?}, k = {:?})",
            self.label, self.positions, self.factors
        )
    }
}

/// Checks the invariants of a [`TreeSpec`]. Root branching (`L_1 = 0`) is only
/// accepted when `allow_root_branching` is set.
pub fn validate_spec(
    positions: Vec<u64>,
    factors: Vec<u64>,
    allow_root_branching: bool,
) -> Result<TreeSpec> {
    if positions.len() != factors.len() {
        return Err(Error::LengthMismatch {
            positions: positions.len(),
            factors: factors.len(),
        });
    }
    for (index, pair) in positions.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(Error::NonIncreasingPositions {
                index: index + 1,
                previous: pair[0],
                value: pair[1],
            });
        }
    }
    if let Some((index, &value)) = factors.iter().enumerate().find(|(_, &k)| k < 2) {
        return Err(Error::BranchFactorBelowTwo { index, value });
    }
    if positions.first() == Some(&0) && !allow_root_branching {
        return Err(Error::RootBranchingNotAllowed);
    }
    Ok(TreeSpec {
        positions,
        factors,
        label: String::new(),
    })
}

/// Forward degree of every vertex at distance `j` from the root.
pub fn kappa(spec: &TreeSpec, j: u64) -> u64 {
    match spec.positions.binary_search(&j) {
        Ok(i) => spec.factors[i],
        Err(_) => 1,
    }
}

/// Number of vertices at distance `r` from the root.
pub fn sphere_size(spec: &TreeSpec, r: u64) -> Result<u64> {
    spec.positions
        .iter()
        .zip(&spec.factors)
        .take_while(|(&l, _)| l < r)
        .try_fold(1u64, |acc, (_, &k)| {
            acc.checked_mul(k).ok_or(Error::Overflow {
                what: "sphere size",
            })
        })
}

/// Number of vertices within distance `depth` of the root.
pub fn vertex_count(spec: &TreeSpec, depth: u64) -> Result<u64> {
    let overflow = Error::Overflow {
        what: "vertex count",
    };
    // Sum sphere sizes piecewise: between consecutive branch positions the
    // sphere size is constant.
    let mut total: u64 = 0;
    let mut size: u64 = 1;
    let mut r: u64 = 0;
    for (&l, &k) in spec.positions.iter().zip(&spec.factors) {
        if l >= depth {
            break;
        }
        // spheres r..=l all have `size` vertices
        let run = l - r + 1;
        total = run
            .checked_mul(size)
            .and_then(|s| total.checked_add(s))
            .ok_or_else(|| overflow.clone())?;
        size = size.checked_mul(k).ok_or_else(|| overflow.clone())?;
        r = l + 1;
    }
    let run = depth - r + 1;
    run.checked_mul(size)
        .and_then(|s| total.checked_add(s))
        .ok_or(overflow)
}

/// A finite tree truncated at sphere `depth`, vertices in BFS order.
#[derive(Clone, Debug)]
pub struct SHTree {
    depth: usize,
    sphere_offsets: Vec<usize>,
    parent: Vec<usize>,
    spec: TreeSpec,
}

impl SHTree {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn spec(&self) -> &TreeSpec {
        &self.spec
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    /// Start offsets of every sphere, plus a trailing sentinel equal to the
    /// vertex count. Sphere `r` occupies `offsets[r]..offsets[r + 1]`.
    pub fn sphere_offsets(&self) -> &[usize] {
        &self.sphere_offsets
    }

    pub fn sphere(&self, r: usize) -> std::ops::Range<usize> {
        self.sphere_offsets[r]..self.sphere_offsets[r + 1]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v != 0).then(|| self.parent[v])
    }

    /// Distance from the root.
    pub fn radius(&self, v: usize) -> usize {
        self.sphere_offsets.partition_point(|&o| o <= v) - 1
    }

    /// Tree edges `(parent, child)` in BFS order of the child.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.parent.len()).map(move |v| (self.parent[v], v))
    }

    /// Degree of `v` inside the truncated tree.
    pub fn truncated_degree(&self, v: usize) -> usize {
        let r = self.radius(v);
        let up = usize::from(v != 0);
        let down = if r < self.depth {
            kappa(&self.spec, r as u64) as usize
        } else {
            0
        };
        up + down
    }
}

/// Builds the truncated tree. Children of earlier parents come first inside
/// every sphere, so each forward subtree occupies a contiguous range of every
/// sphere it meets.
pub fn build_tree(spec: &TreeSpec, depth: usize) -> Result<SHTree> {
    let total = vertex_count(spec, depth as u64)?;
    if total > MAX_TREE_VERTICES {
        return Err(Error::Overflow {
            what: "vertex count (exceeds tree memory budget)",
        });
    }
    let total = total as usize;
    let mut sphere_offsets = Vec::with_capacity(depth + 2);
    let mut parent = Vec::with_capacity(total);
    sphere_offsets.push(0);
    parent.push(0);
    sphere_offsets.push(1);
    for r in 1..=depth {
        let prev = sphere_offsets[r - 1]..sphere_offsets[r];
        let fan = kappa(spec, (r - 1) as u64) as usize;
        for p in prev {
            parent.extend(std::iter::repeat_n(p, fan));
        }
        sphere_offsets.push(parent.len());
    }
    debug_assert_eq!(parent.len(), total);
    Ok(SHTree {
        depth,
        sphere_offsets,
        parent,
        spec: spec.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalityVerdict {
    pub is_normal_prefix: bool,
    pub witness: Option<String>,
}

/// Prefix proxy for normality: an unbounded `k_n` must not sit on unit gaps
/// forever. `min_tail` is how many trailing levels with unit gaps and
/// strictly increasing factors it takes to flag the prefix.
pub fn is_normal_prefix_with(spec: &TreeSpec, min_tail: usize) -> NormalityVerdict {
    let n = spec.positions.len();
    let mut start = n.saturating_sub(1);
    while start > 0
        && spec.positions[start] - spec.positions[start - 1] == 1
        && spec.factors[start] > spec.factors[start - 1]
    {
        start -= 1;
    }
    let tail = n - start;
    if n >= 2 && tail >= min_tail.max(2) {
        NormalityVerdict {
            is_normal_prefix: false,
            witness: Some(format!(
                "levels {}..={} have unit gaps with strictly increasing k ({:?})",
                start + 1,
                n,
                &spec.factors[start..]
            )),
        }
    } else {
        NormalityVerdict {
            is_normal_prefix: true,
            witness: None,
        }
    }
}

/// [`is_normal_prefix_with`] using a tail of three levels.
pub fn is_normal_prefix(spec: &TreeSpec) -> NormalityVerdict {
    is_normal_prefix_with(spec, 3)
}

/// Gap schedule `L_{n+1} - L_n` for the presets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GapSchedule {
    /// `L_{n+1} - L_n = 2^n`.
    Doubling,
    /// `L_{n+1} - L_n = n + 1`.
    Linear,
    /// `L_{n+1} - L_n = g`.
    Constant(u64),
    /// `L_{n+1} - L_n = ceil(alpha_n^(1 + eps))`.
    AlphaPower(f64),
}

impl GapSchedule {
    fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidParam {
            param: "gaps".into(),
            reason: format!("unrecognized schedule `{text}`"),
        };
        match text {
            "doubling" => Ok(GapSchedule::Doubling),
            "linear" => Ok(GapSchedule::Linear),
            "alpha_sq" => Ok(GapSchedule::AlphaPower(1.0)),
            _ => {
                if let Some(g) = text.strip_prefix("constant:") {
                    let g: u64 = g.parse().map_err(|_| bad())?;
                    if g == 0 {
                        return Err(bad());
                    }
                    Ok(GapSchedule::Constant(g))
                } else if let Some(e) = text.strip_prefix("alpha_pow:") {
                    let e: f64 = e.parse().map_err(|_| bad())?;
                    if !(e.is_finite() && e >= 0.0) {
                        return Err(bad());
                    }
                    Ok(GapSchedule::AlphaPower(e))
                } else {
                    Err(bad())
                }
            }
        }
    }

    /// Gap following level `n` (1-based), given `alpha_n` when it fits.
    fn gap(&self, n: usize, alpha: Option<u64>) -> Result<u64> {
        let overflow = Error::Overflow {
            what: "gap schedule",
        };
        match *self {
            GapSchedule::Doubling => 1u64.checked_shl(n as u32).ok_or(overflow),
            GapSchedule::Linear => Ok(n as u64 + 1),
            GapSchedule::Constant(g) => Ok(g),
            GapSchedule::AlphaPower(eps) => {
                let alpha = alpha.ok_or(Error::Overflow { what: "alpha_n" })?;
                let exact = (eps.fract() == 0.0 && eps < 62.0)
                    .then(|| alpha.checked_pow(eps as u32 + 1))
                    .flatten();
                match exact {
                    Some(g) => Ok(g),
                    None => {
                        let g = (alpha as f64).powf(1.0 + eps).ceil();
                        if g < u64::MAX as f64 {
                            Ok(g as u64)
                        } else {
                            Err(overflow)
                        }
                    }
                }
            }
        }
    }
}

/// Named parameter map consumed by [`preset`].
pub type PresetParams = BTreeMap<String, String>;

fn param<T: std::str::FromStr>(params: &PresetParams, key: &'static str) -> Result<Option<T>> {
    match params.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidParam {
                param: key.to_string(),
                reason: format!("cannot parse `{raw}`"),
            }),
    }
}

fn required<T: std::str::FromStr>(
    params: &PresetParams,
    preset: &str,
    key: &'static str,
) -> Result<T> {
    param(params, key)?.ok_or_else(|| Error::MissingParam {
        preset: preset.to_string(),
        param: key,
    })
}

/// Largest `levels` a preset accepts.
pub const MAX_PRESET_LEVELS: usize = 1 << 24;

fn preset_levels(params: &PresetParams, preset: &str) -> Result<usize> {
    let levels: usize = required(params, preset, "levels")?;
    if levels > MAX_PRESET_LEVELS {
        return Err(Error::InvalidParam {
            param: "levels".into(),
            reason: format!("at most {MAX_PRESET_LEVELS}"),
        });
    }
    Ok(levels)
}

/// `floor(base^exponent)` as an exact integer, or `Overflow`.
fn floor_pow(base: u64, exponent: f64) -> Result<u64> {
    if exponent.fract() == 0.0 && (0.0..64.0).contains(&exponent) {
        return base.checked_pow(exponent as u32).ok_or(Error::Overflow {
            what: "branch factor",
        });
    }
    let value = (base as f64).powf(exponent).floor();
    if value.is_finite() && value < u64::MAX as f64 {
        Ok(value as u64)
    } else {
        Err(Error::Overflow {
            what: "branch factor",
        })
    }
}

/// Builds one of the named model families on a finite prefix.
///
/// | name        | required          | optional                                          |
/// |-------------|-------------------|---------------------------------------------------|
/// | `bounded_k` | `k0`, `levels`    | `gaps` (default `doubling`), `first` (1), `cap`   |
/// | `unbounded_k` | `levels`        | `gaps` (default `alpha_sq`), `first` (1), `cap`, `eps` |
/// | `jl_beta`   | `beta`, `levels`  | `cap` (default 10^6)                              |
/// | `jl_beta_c` | `c`, `levels`     | `cap` (default 10^6)                              |
///
/// `unbounded_k` uses `k_n = n + 1`; `eps` overrides the exponent of the
/// default `alpha_sq` schedule. The two `jl_*` families place branches at
/// `2^(n^n)`; once that exceeds `cap` the next position is `2^L_{n-1}`, then
/// `L_{n-1}^2`, and a position that still exceeds `cap` is clamped to it.
/// Every substitution is recorded in the label. Positions that would reach
/// past `cap` in the other families end the prefix early.
pub fn preset(name: &str, params: &PresetParams) -> Result<TreeSpec> {
    match name {
        "bounded_k" => {
            let k0: u64 = required(params, name, "k0")?;
            let levels = preset_levels(params, name)?;
            let gaps = match params.get("gaps") {
                Some(g) => GapSchedule::parse(g.trim())?,
                None => GapSchedule::Doubling,
            };
            let first = param(params, "first")?.unwrap_or(1);
            let cap = param(params, "cap")?;
            scheduled(name, levels, first, cap, gaps, |_| Ok(k0))
        }
        "unbounded_k" => {
            let levels = preset_levels(params, name)?;
            let eps: f64 = param(params, "eps")?.unwrap_or(1.0);
            let gaps = match params.get("gaps") {
                Some(g) => GapSchedule::parse(g.trim())?,
                None => GapSchedule::AlphaPower(eps),
            };
            let first = param(params, "first")?.unwrap_or(1);
            let cap = param(params, "cap")?;
            scheduled(name, levels, first, cap, gaps, |n| Ok(n as u64 + 1))
        }
        "jl_beta" => {
            let beta: f64 = required(params, name, "beta")?;
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::InvalidParam {
                    param: "beta".into(),
                    reason: "must be positive".into(),
                });
            }
            let levels = preset_levels(params, name)?;
            let cap = param(params, "cap")?.unwrap_or(1_000_000);
            jitomirskaya_last(name, levels, cap, |_| beta, format!("beta={beta}"))
        }
        "jl_beta_c" => {
            let c: f64 = required(params, name, "c")?;
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::InvalidParam {
                    param: "c".into(),
                    reason: "must lie in (0, 1)".into(),
                });
            }
            let levels = preset_levels(params, name)?;
            let cap = param(params, "cap")?.unwrap_or(1_000_000);
            let beta_n = move |n: usize| {
                let n = n as f64;
                c * (n + 1.0).powf(n + 1.0) / n.powf(n)
            };
            jitomirskaya_last(name, levels, cap, beta_n, format!("c={c}"))
        }
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}

fn scheduled(
    name: &str,
    levels: usize,
    first: u64,
    cap: Option<u64>,
    gaps: GapSchedule,
    factor: impl Fn(usize) -> Result<u64>,
) -> Result<TreeSpec> {
    let mut positions = Vec::new();
    let mut factors = Vec::new();
    let mut alpha = Some(1u64);
    let mut position = first;
    let mut note = String::new();
    for n in 1..=levels {
        if cap.is_some_and(|c| position > c) {
            note = format!(", stopped at {} levels by cap", n - 1);
            break;
        }
        let k = factor(n)?;
        positions.push(position);
        factors.push(k);
        if n == levels {
            break;
        }
        alpha = alpha.and_then(|a| a.checked_mul(k));
        position = position
            .checked_add(gaps.gap(n, alpha)?)
            .ok_or(Error::Overflow {
                what: "branch position",
            })?;
    }
    let spec = validate_spec(positions, factors, first == 0)?;
    Ok(spec.with_label(format!("{name}[gaps={gaps:?}{note}]")))
}

fn jitomirskaya_last(
    name: &str,
    levels: usize,
    cap: u64,
    exponent: impl Fn(usize) -> f64,
    tag: String,
) -> Result<TreeSpec> {
    let mut positions: Vec<u64> = Vec::new();
    let mut factors = Vec::new();
    let mut notes = Vec::new();
    for n in 1..=levels {
        // 2^(n^n), exact where it fits
        let exact = (n as u32)
            .checked_pow(n as u32)
            .and_then(|e| 1u64.checked_shl(e).filter(|_| e < 64));
        let position = match exact {
            Some(l) if l <= cap => l,
            _ => {
                let prev = positions.last().copied().unwrap_or(1);
                let tower = u32::try_from(prev)
                    .ok()
                    .and_then(|e| 1u64.checked_shl(e).filter(|_| e < 64));
                match prev.checked_mul(prev) {
                    _ if tower.is_some_and(|t| t <= cap && t > prev) => {
                        notes.push(format!("L_{n}=2^L_{}", n - 1));
                        tower.unwrap()
                    }
                    Some(sq) if sq <= cap && sq > prev => {
                        notes.push(format!("L_{n}=L_{}^2", n - 1));
                        sq
                    }
                    _ if cap > prev => {
                        notes.push(format!("L_{n}=cap"));
                        cap
                    }
                    _ => {
                        notes.push(format!("stopped at {} levels by cap", n - 1));
                        break;
                    }
                }
            }
        };
        positions.push(position);
        factors.push(floor_pow(position, exponent(n))?);
    }
    let spec = validate_spec(positions, factors, false)?;
    let notes = if notes.is_empty() {
        String::new()
    } else {
        format!(", {}", notes.join(", "))
    };
    Ok(spec.with_label(format!("{name}[{tag}, cap={cap}{notes}]")))
}
