use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::exact::Rational;
use crate::lp::{LinearProgram, LpSolution, Region, Relation};
use crate::model::{Game, PeriodicPlay};
use crate::values::common::{
    candidate_points, cycle_from_counts, good_prefixes, prefix_payoff, round_to_denominator,
    tail_combos, Combo,
};
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Play(PeriodicPlay),
    /// Limit of plays; no single periodic play attains the point.
    Closure,
}

impl Witness {
    pub fn play(&self) -> Option<&PeriodicPlay> {
        match self {
            Witness::Play(p) => Some(p),
            Witness::Closure => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PayoffPoint {
    pub payoff: Vec<Rational>,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PayoffPolytope {
    pub dimension: usize,
    pub epsilon: f64,
    /// Extreme points in lexicographic order.
    pub vertices: Vec<PayoffPoint>,
}

impl PayoffPolytope {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Smallest sup-norm distance from `w` to the hull, with hull weights
    /// on the vertices attaining it.
    pub fn distance(&self, w: &[Rational]) -> Result<Option<(Rational, Vec<Rational>)>> {
        let points: Vec<&[Rational]> = self.vertices.iter().map(|v| &v.payoff[..]).collect();
        nearest_combination(&points, w)
    }

    pub fn contains(&self, w: &[Rational]) -> Result<bool> {
        Ok(self.distance(w)?.is_some_and(|(d, _)| d.is_zero()))
    }
}

/// Minimises `delta` subject to `|sum_k lambda_k v_k - w|_inf <= delta`.
pub(crate) fn nearest_combination(
    points: &[&[Rational]],
    w: &[Rational],
) -> Result<Option<(Rational, Vec<Rational>)>> {
    let k = points.len();
    if k == 0 {
        return Ok(None);
    }
    let mut lp = LinearProgram::new(k + 1);
    let mut obj = vec![Rational::zero(); k + 1];
    obj[k] = -Rational::one();
    lp.maximize(obj);
    let mut ones = vec![Rational::one(); k + 1];
    ones[k] = Rational::zero();
    lp.add(ones, Relation::Eq, Rational::one());
    for (i, wi) in w.iter().enumerate() {
        let mut row: Vec<Rational> = points.iter().map(|p| p[i].clone()).collect();
        row.push(-Rational::one());
        lp.add(row.clone(), Relation::Le, wi.clone());
        row[k] = Rational::one();
        lp.add(row, Relation::Ge, wi.clone());
    }
    match lp.solve()? {
        LpSolution::Optimal { mut x, .. } => {
            let delta = x.pop().expect("delta variable");
            Ok(Some((delta, x)))
        }
        _ => Ok(None),
    }
}

/// Basic convex weights of `points` reproducing `target`, so that at most
/// `dimension + 1` are positive.
pub(crate) fn basic_combination(points: &[&[Rational]], target: &[Rational]) -> Result<Option<Vec<Rational>>> {
    let k = points.len();
    let mut lp = LinearProgram::new(k);
    lp.maximize(vec![Rational::zero(); k]);
    lp.add(vec![Rational::one(); k], Relation::Eq, Rational::one());
    for (i, t) in target.iter().enumerate() {
        lp.add(points.iter().map(|p| p[i].clone()).collect(), Relation::Eq, t.clone());
    }
    Ok(lp.solve()?.optimal().map(|(x, _)| x))
}

/// Extreme points of the image of `region` under the linear map `rows`,
/// together with preimages.
fn image_extremes(region: &Region, rows: &[Vec<Rational>]) -> Result<Vec<(Vec<Rational>, Vec<Rational>)>> {
    let k = rows.len();
    let image = |z: &[Rational]| -> Vec<Rational> {
        rows.iter()
            .map(|r| r.iter().zip(z).fold(Rational::zero(), |a, (c, v)| a + c * v))
            .collect()
    };
    let mut found: Vec<(Vec<Rational>, Vec<Rational>)> = Vec::new();
    let probe = |dir: &[Rational], found: &mut Vec<(Vec<Rational>, Vec<Rational>)>| -> Result<bool> {
        let obj: Vec<Rational> = (0..region.n_vars)
            .map(|v| {
                rows.iter()
                    .zip(dir)
                    .fold(Rational::zero(), |a, (r, d)| a + &r[v] * d)
            })
            .collect();
        let Some((z, _)) = region.maximize(&obj, &Rational::zero())? else {
            return Ok(false);
        };
        let y = image(&z);
        if found.iter().any(|(f, _)| *f == y) {
            return Ok(false);
        }
        found.push((y, z));
        Ok(true)
    };
    let mut dirs: Vec<Vec<Rational>> = Vec::new();
    let ternary = 3usize.pow(k as u32);
    for code in 0..ternary {
        let dir: Vec<Rational> = (0..k)
            .map(|j| Rational::from_integer((((code / 3usize.pow(j as u32)) % 3) as i64 - 1).into()))
            .collect();
        if dir.iter().any(|d| !d.is_zero()) && (k != 2 || dir.iter().filter(|d| d.is_zero()).count() == 1) {
            dirs.push(dir);
        }
    }
    for d in &dirs {
        probe(d, &mut found)?;
    }
    if k == 2 {
        // Refine along outward edge normals until the polygon is complete.
        loop {
            let pts: Vec<Vec<Rational>> = found.iter().map(|(y, _)| y.clone()).collect();
            let hull = hull_2d(&pts);
            if hull.len() < 2 {
                break;
            }
            let mut grew = false;
            for e in 0..hull.len() {
                let a = &pts[hull[e]];
                let b = &pts[hull[(e + 1) % hull.len()]];
                let normal = vec![&b[1] - &a[1], &a[0] - &b[0]];
                if probe(&normal, &mut found)? {
                    let y = &found.last().expect("probe pushed").0;
                    let gain = |p: &[Rational]| &normal[0] * &p[0] + &normal[1] * &p[1];
                    if gain(y) > gain(a) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
    }
    Ok(found)
}

/// Counter-clockwise convex hull of planar points, collinear points dropped.
pub fn hull_2d(points: &[Vec<Rational>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].cmp(&points[b]));
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() <= 2 {
        return idx;
    }
    let cross = |o: usize, a: usize, b: usize| {
        let (o, a, b) = (&points[o], &points[a], &points[b]);
        (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
    };
    let mut lower: Vec<usize> = Vec::new();
    for &p in &idx {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= Rational::zero() {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in idx.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= Rational::zero() {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Indices of the extreme points among `points`, in lexicographic order.
pub fn extreme_points(points: &[Vec<Rational>]) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].cmp(&points[b]));
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    let dim = points.first().map_or(0, |p| p.len());
    let mut keep = match dim {
        0 => idx.into_iter().take(1).collect(),
        1 => {
            let mut v = vec![idx[0]];
            if idx.len() > 1 {
                v.push(idx[idx.len() - 1]);
            }
            v
        }
        2 => hull_2d(points),
        _ => {
            let mut out = Vec::new();
            for &j in &idx {
                let others: Vec<&[Rational]> = idx
                    .iter()
                    .filter(|&&o| o != j)
                    .map(|&o| &points[o][..])
                    .collect();
                if others.is_empty() || basic_combination(&others, &points[j])?.is_none() {
                    out.push(j);
                }
            }
            out
        }
    };
    keep.sort_by(|&a, &b| points[a].cmp(&points[b]));
    Ok(keep)
}

fn lcm_denominator(z: &[Rational]) -> Option<usize> {
    z.iter()
        .try_fold(1usize, |acc, v| v.denom().to_usize().map(|d| acc.lcm(&d)))
}

/// Achievable payoff vectors of periodic plays meeting `thresholds` (all
/// plays when `None`), as extreme points of each outcome pattern.
pub fn payoff_points(
    game: &Game,
    thresholds: Option<&[Rational]>,
    max_denominator: usize,
) -> Result<Vec<PayoffPoint>> {
    let n = game.n_players();
    let all: Vec<usize> = (0..n).collect();
    let horizon = game.max_horizon();
    let mut prefixes: BTreeMap<Vec<Option<Rational>>, Vec<usize>> = BTreeMap::new();
    for h in good_prefixes(game, &all, thresholds)? {
        let seq = game.sequence(h, horizon);
        let key: Vec<Option<Rational>> = all.iter().map(|&i| prefix_payoff(game, i, &seq)).collect();
        prefixes.entry(key).or_insert(seq);
    }
    let combos = tail_combos(game, &all, thresholds)?;
    let mut points: BTreeMap<Vec<Rational>, Witness> = BTreeMap::new();
    for combo in &combos {
        for (tail, cycle) in combo_points(game, combo, max_denominator)? {
            for (fh, seq) in &prefixes {
                let payoff: Vec<Rational> = (0..n)
                    .map(|i| fh[i].clone().or_else(|| tail[i].clone()).expect("every player has a payoff"))
                    .collect();
                let witness = match &cycle {
                    Some(c) => {
                        let play = PeriodicPlay::new(seq.clone(), c.clone());
                        if play.evaluate_all(game)? == payoff {
                            Witness::Play(play)
                        } else {
                            Witness::Closure
                        }
                    }
                    None => Witness::Closure,
                };
                let slot = points.entry(payoff).or_insert(Witness::Closure);
                if *slot == Witness::Closure {
                    *slot = witness;
                }
            }
        }
    }
    Ok(points
        .into_iter()
        .map(|(payoff, witness)| PayoffPoint { payoff, witness })
        .collect())
}

/// Tail payoff vectors of the extreme points of a combination, with a cycle
/// realising each when one was found.
fn combo_points(
    game: &Game,
    combo: &Combo,
    max_denominator: usize,
) -> Result<Vec<(Vec<Option<Rational>>, Option<Vec<usize>>)>> {
    let n = game.n_players();
    let linear: Vec<usize> = (0..n).filter(|&i| combo.linear[i].is_some()).collect();
    let tail_of = |z: &[Rational]| -> Vec<Option<Rational>> {
        (0..n).map(|i| combo.payoff_at(i, z)).collect()
    };
    let matches = |z: &[Rational], cycle: &[usize]| -> Result<bool> {
        let play = PeriodicPlay::cycle(cycle.to_vec());
        let want = tail_of(z);
        for i in 0..n {
            if let Some(v) = &want[i] {
                if play.evaluate(game, i)? != *v {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    if linear.is_empty() {
        let points = candidate_points(combo, n)?;
        let Some(first) = points.first() else {
            return Ok(Vec::new());
        };
        let tail = tail_of(first);
        // Prefer a cycle whose frequencies sit strictly inside every rule
        // boundary, so that finite prefixes do not flip the outcome.
        let mut fallback = None;
        let np = game.n_profiles();
        for q in 0..np {
            let unit: Vec<Rational> = (0..np)
                .map(|p| if p == q { Rational::one() } else { Rational::zero() })
                .collect();
            if combo.region.contains_robustly(&unit) && matches(first, &[q])? {
                return Ok(vec![(tail, Some(vec![q]))]);
            }
        }
        for d in 1..=max_denominator {
            for z in &points {
                let counts = round_to_denominator(z, d);
                let cycle = cycle_from_counts(&counts);
                if !matches(first, &cycle)? {
                    continue;
                }
                let freq: Vec<Rational> = counts
                    .iter()
                    .map(|&c| Rational::new(c.into(), d.into()))
                    .collect();
                if combo.region.contains_robustly(&freq) {
                    return Ok(vec![(tail, Some(cycle))]);
                }
                fallback.get_or_insert(cycle);
            }
        }
        return Ok(vec![(tail, fallback)]);
    }
    let rows: Vec<Vec<Rational>> = linear
        .iter()
        .map(|&i| combo.linear[i].clone().expect("linear payoff"))
        .collect();
    let mut out = Vec::new();
    for (_, z) in image_extremes(&combo.region, &rows)? {
        let cycle = lcm_denominator(&z)
            .filter(|&d| d <= max_denominator)
            .map(|d| cycle_from_counts(&round_to_denominator(&z, d)));
        let cycle = match cycle {
            Some(c) if matches(&z, &c)? => Some(c),
            _ => None,
        };
        out.push((tail_of(&z), cycle));
    }
    Ok(out)
}

/// Hull of the `epsilon`-individually rational payoff vectors.
pub fn payoff_set(
    game: &Game,
    certificates: &[crate::stage::MinmaxCertificate],
    epsilon: f64,
    max_denominator: usize,
) -> Result<PayoffPolytope> {
    let eps = crate::exact::snap(epsilon, crate::exact::LITERAL_TOLERANCE).unwrap_or_else(Rational::zero);
    let thresholds: Vec<Rational> = certificates.iter().map(|c| c.lower() - &eps).collect();
    let points = payoff_points(game, Some(&thresholds), max_denominator)?;
    let coords: Vec<Vec<Rational>> = points.iter().map(|p| p.payoff.clone()).collect();
    let keep = if coords.is_empty() { Vec::new() } else { extreme_points(&coords)? };
    Ok(PayoffPolytope {
        dimension: game.n_players(),
        epsilon,
        vertices: keep.into_iter().map(|k| points[k].clone()).collect(),
    })
}

/// Every achievable payoff vector of the game's finite outcome patterns,
/// without individual rationality.
pub fn feasible_outcomes(game: &Game, max_denominator: usize) -> Result<Vec<PayoffPoint>> {
    payoff_points(game, None, max_denominator)
}
