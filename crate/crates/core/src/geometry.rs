//! Runs, the triangle representation of `+`-boundary configurations,
//! contours and the associated energy and entropy estimates.
//!
//! Interface points sit at half-integers `x + 1/2`. Internally an interface
//! between sites `x` and `x + 1` is stored as the integer `x + 1`, so a
//! triangle with support `lo..=hi` has endpoints `lo` and `hi + 1`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::interval::Interval;
use crate::lattice::{CouplingTable, Sign, SpinWindow};

// ---------------------------------------------------------------------------
// Runs

/// A maximal constant block of spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    /// Run index: `1` for the run containing the origin, increasing to the right.
    pub index: i64,
    pub start: i64,
    pub end: i64,
    pub sign: Sign,
}

impl Run {
    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: i64) -> bool {
        self.start <= site && site <= self.end
    }
}

/// Runs of a configuration restricted to a region `V` containing the origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDecomposition {
    pub region: Interval,
    pub origin_sign: Sign,
    /// Runs ordered left to right.
    pub runs: Vec<Run>,
    pub b_v: i64,
    pub e_v: i64,
}

impl RunDecomposition {
    pub fn run(&self, index: i64) -> Option<&Run> {
        let pos = index - self.b_v;
        if pos < 0 {
            return None;
        }
        self.runs.get(pos as usize)
    }

    pub fn origin_run(&self) -> &Run {
        self.run(1).expect("the origin run always exists")
    }

    /// Runs strictly inside the region, i.e. not clipped by either edge.
    pub fn interior_runs(&self) -> impl Iterator<Item = &Run> {
        let region = self.region;
        self.runs
            .iter()
            .filter(move |r| r.start > region.lo && r.end < region.hi)
    }
}

/// Decomposes `spins` restricted to `region` into maximal constant blocks.
///
/// Blocks are clipped at the edges of `region`; the block containing the
/// origin gets index 1, and `b_v`, `e_v` are the indices of the leftmost
/// and rightmost blocks.
pub fn runs(spins: &SpinWindow, region: Interval) -> Result<RunDecomposition> {
    if !region.contains(0) {
        return domain(format!("region {region} does not contain the origin"));
    }
    if !spins.interval().contains_interval(&region) {
        return domain(format!("region {region} is not inside window {}", spins.interval()));
    }
    let mut blocks: Vec<(i64, i64, Sign)> = Vec::new();
    let mut start = region.lo;
    for site in region.lo..=region.hi {
        if site == region.hi || spins.spin(site) != spins.spin(site + 1) {
            blocks.push((start, site, Sign::from_spin(spins.spin(site))));
            start = site + 1;
        }
    }
    let origin_pos = blocks
        .iter()
        .position(|&(s, e, _)| s <= 0 && 0 <= e)
        .expect("origin lies in the region");
    let runs: Vec<Run> = blocks
        .into_iter()
        .enumerate()
        .map(|(k, (start, end, sign))| Run {
            index: k as i64 - origin_pos as i64 + 1,
            start,
            end,
            sign,
        })
        .collect();
    Ok(RunDecomposition {
        region,
        origin_sign: Sign::from_spin(spins.spin(0)),
        b_v: runs[0].index,
        e_v: runs[runs.len() - 1].index,
        runs,
    })
}

// ---------------------------------------------------------------------------
// Triangles

/// A triangle, identified by its support `lo..=hi` (the sites under its basis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "TriangleDump", try_from = "TriangleDump")]
pub struct Triangle {
    pub lo: i64,
    pub hi: i64,
}

#[derive(Serialize, Deserialize)]
struct TriangleDump {
    support: [i64; 2],
    mass: usize,
}

impl From<Triangle> for TriangleDump {
    fn from(t: Triangle) -> Self {
        TriangleDump {
            support: [t.lo, t.hi],
            mass: t.mass(),
        }
    }
}

impl TryFrom<TriangleDump> for Triangle {
    type Error = Error;

    fn try_from(d: TriangleDump) -> Result<Self> {
        let t = Triangle::new(d.support[0], d.support[1])?;
        if t.mass() != d.mass {
            return Err(Error::Parse(format!("mass {} does not match support {}", d.mass, t)));
        }
        Ok(t)
    }
}

impl Triangle {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidFamily(format!("empty support {lo}..{hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn mass(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn support(&self) -> Interval {
        Interval { lo: self.lo, hi: self.hi }
    }

    /// Left and right interface points, doubled: `2x` for the point `x`.
    pub fn endpoints_doubled(&self) -> (i64, i64) {
        (2 * self.lo - 1, 2 * self.hi + 1)
    }

    pub fn disjoint(&self, other: &Triangle) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    /// `other`'s support lies inside this one's.
    pub fn contains(&self, other: &Triangle) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn crosses(&self, other: &Triangle) -> bool {
        !self.disjoint(other) && !self.contains(other) && !other.contains(self)
    }
}

impl fmt::Display for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Distance between triangles: one plus the smallest distance between an
/// endpoint of one and an endpoint of the other.
///
/// For disjoint supports this is the lattice distance between the closest
/// support sites; it also covers nested pairs.
pub fn triangle_distance(a: &Triangle, b: &Triangle) -> i64 {
    let ea = [a.lo, a.hi + 1];
    let eb = [b.lo, b.hi + 1];
    let mut best = i64::MAX;
    for x in ea {
        for y in eb {
            best = best.min((x - y).abs());
        }
    }
    best + 1
}

/// Triangles of a `+`-boundary configuration, sorted by `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleFamily {
    pub window: Interval,
    pub triangles: Vec<Triangle>,
}

impl TriangleFamily {
    pub fn new(window: Interval, mut triangles: Vec<Triangle>) -> Result<Self> {
        for t in &triangles {
            if !window.contains_interval(&t.support()) {
                return Err(Error::InvalidFamily(format!("triangle {t} leaves window {window}")));
            }
        }
        triangles.sort();
        Ok(Self { window, triangles })
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn mass(&self) -> usize {
        self.triangles.iter().map(Triangle::mass).sum()
    }

    /// The family without the triangles of `sub`.
    pub fn without(&self, sub: &[Triangle]) -> Result<TriangleFamily> {
        let mut rest = self.triangles.clone();
        for t in sub {
            match rest.iter().position(|u| u == t) {
                Some(k) => {
                    rest.remove(k);
                }
                None => return domain(format!("triangle {t} is not in the family")),
            }
        }
        Ok(TriangleFamily {
            window: self.window,
            triangles: rest,
        })
    }
}

/// Interface points of `spins` (with its boundary outside the window) as
/// integers `x + 1` for a sign change between `x` and `x + 1`.
fn interface_points(spins: &SpinWindow) -> Vec<i64> {
    (spins.lo() - 1..=spins.hi())
        .filter(|&x| spins.spin(x) != spins.spin(x + 1))
        .map(|x| x + 1)
        .collect()
}

/// Builds the triangles of a `+`-boundary configuration.
///
/// Adjacent interface points are paired by repeatedly taking the pair with
/// the smallest gap, the leftmost one among equal gaps, and removing it.
pub fn triangles_from_spins(spins: &SpinWindow) -> Result<TriangleFamily> {
    if spins.boundary() != Sign::Plus {
        return domain("triangles are defined for the + boundary condition");
    }
    let points = interface_points(spins);
    let n = points.len();
    if !n.is_multiple_of(2) {
        return Err(Error::Internal(format!("odd number of interface points ({n})")));
    }
    const NONE: usize = usize::MAX;
    let mut prev: Vec<usize> = (0..n).map(|k| if k == 0 { NONE } else { k - 1 }).collect();
    let mut next: Vec<usize> = (0..n).map(|k| if k + 1 == n { NONE } else { k + 1 }).collect();
    let mut alive = vec![true; n];
    let mut heap: BinaryHeap<Reverse<(i64, i64, usize, usize)>> = (0..n.saturating_sub(1))
        .map(|k| Reverse((points[k + 1] - points[k], points[k], k, k + 1)))
        .collect();

    let mut triangles = Vec::with_capacity(n / 2);
    while let Some(Reverse((_, _, a, b))) = heap.pop() {
        if !alive[a] || !alive[b] || next[a] != b {
            continue;
        }
        alive[a] = false;
        alive[b] = false;
        triangles.push(Triangle {
            lo: points[a],
            hi: points[b] - 1,
        });
        let (p, q) = (prev[a], next[b]);
        if p != NONE {
            next[p] = q;
        }
        if q != NONE {
            prev[q] = p;
        }
        if p != NONE && q != NONE {
            heap.push(Reverse((points[q] - points[p], points[p], p, q)));
        }
    }
    if triangles.len() * 2 != n {
        return Err(Error::Internal("interface points left unpaired".into()));
    }
    TriangleFamily::new(spins.interval(), triangles)
}

/// Checks that supports are pairwise disjoint or nested, with no repeats.
fn check_laminar(triangles: &[Triangle]) -> Result<()> {
    for (k, a) in triangles.iter().enumerate() {
        for b in &triangles[k + 1..] {
            if a == b {
                return Err(Error::InvalidFamily(format!("triangle {a} appears twice")));
            }
            if a.crosses(b) {
                return Err(Error::InvalidFamily(format!("supports {a} and {b} overlap without nesting")));
            }
        }
    }
    Ok(())
}

/// `sigma_i = (-1)^(number of supports containing i)`, `+` boundary.
pub fn spins_from_triangles(family: &TriangleFamily) -> Result<SpinWindow> {
    check_laminar(&family.triangles)?;
    let window = family.window;
    let mut parity = vec![0i32; window.len() + 1];
    for t in &family.triangles {
        if !window.contains_interval(&t.support()) {
            return Err(Error::InvalidFamily(format!("triangle {t} leaves window {window}")));
        }
        parity[(t.lo - window.lo) as usize] += 1;
        parity[(t.hi - window.lo + 1) as usize] -= 1;
    }
    let mut count = 0;
    let spins = parity[..window.len()]
        .iter()
        .map(|d| {
            count += d;
            if count % 2 == 0 {
                1
            } else {
                -1
            }
        })
        .collect();
    SpinWindow::new(window.lo, spins, Sign::Plus)
}

/// Pairwise condition on a family: disjoint supports must be at distance
/// at least the smaller mass; crossing supports are rejected; nested pairs
/// are not distance-checked.
pub fn compatible(triangles: &[Triangle]) -> bool {
    for (k, a) in triangles.iter().enumerate() {
        for b in &triangles[k + 1..] {
            if a.disjoint(b) {
                if triangle_distance(a, b) < a.mass().min(b.mass()) as i64 {
                    return false;
                }
            } else if a.crosses(b) || a == b {
                return false;
            }
        }
    }
    true
}

/// A family is the image of some configuration iff it is compatible and
/// survives the spins/triangles roundtrip.
pub fn is_realizable(triangles: &[Triangle]) -> bool {
    if triangles.is_empty() {
        return true;
    }
    if !compatible(triangles) {
        return false;
    }
    let lo = triangles.iter().map(|t| t.lo).min().unwrap();
    let hi = triangles.iter().map(|t| t.hi).max().unwrap();
    let Ok(family) = TriangleFamily::new(Interval { lo, hi }, triangles.to_vec()) else {
        return false;
    };
    match spins_from_triangles(&family).and_then(|s| triangles_from_spins(&s)) {
        Ok(back) => back.triangles == family.triangles,
        Err(_) => false,
    }
}

/// Sites flipped to `-` by a family (odd coverage).
fn minus_sites(triangles: &[Triangle]) -> Vec<i64> {
    let mut edges: Vec<(i64, i32)> = Vec::with_capacity(2 * triangles.len());
    for t in triangles {
        edges.push((t.lo, 1));
        edges.push((t.hi + 1, -1));
    }
    edges.sort();
    let mut out = Vec::new();
    let mut depth = 0;
    let mut k = 0;
    while k < edges.len() {
        let x = edges[k].0;
        while k < edges.len() && edges[k].0 == x {
            depth += edges[k].1;
            k += 1;
        }
        if depth % 2 != 0 && k < edges.len() {
            out.extend(x..edges[k].0);
        }
    }
    out
}

/// `H_0^+` of the configuration that is `-` exactly on `minus` (sorted):
/// `2 sum_{i in A} [2 K(1) - sum_{j in A, j != i} J(|i-j|)]`.
pub fn plus_sea_energy(minus: &[i64], table: &CouplingTable) -> f64 {
    let k1 = table.tail(1);
    let mut total = 0.0;
    for (a, &i) in minus.iter().enumerate() {
        let mut inner = 0.0;
        for &j in &minus[a + 1..] {
            inner += table.coupling((j - i) as usize);
        }
        total += k1 - inner;
    }
    4.0 * total
}

/// `H_0^+(S | T \ S) = H_0^+(T) - H_0^+(T \ S)`, evaluated on the infinite
/// `+` sea with exact tail sums.
pub fn erase_energy(sub: &[Triangle], family: &[Triangle], table: &CouplingTable) -> Result<f64> {
    let mut rest = family.to_vec();
    for t in sub {
        match rest.iter().position(|u| u == t) {
            Some(k) => {
                rest.remove(k);
            }
            None => return domain(format!("triangle {t} is not in the family")),
        }
    }
    let full = plus_sea_energy(&minus_sites(family), table);
    let reduced = plus_sea_energy(&minus_sites(&rest), table);
    Ok(full - reduced)
}

/// Upper end of the domain of `zeta`: `ln 3 / ln 2 - 1`.
pub fn zeta_domain_limit() -> f64 {
    3f64.log2() - 1.0
}

/// `zeta(alpha) = 1 - 2 (2^alpha - 1)`.
pub fn zeta(alpha: f64) -> Result<f64> {
    if !(0.0..zeta_domain_limit()).contains(&alpha) {
        return domain(format!("alpha = {alpha} outside [0, ln3/ln2 - 1)"));
    }
    Ok(1.0 - 2.0 * (2f64.powf(alpha) - 1.0))
}

/// Per-triangle cost `|T|^alpha`, or `log|T| + 4` when `alpha = 0`.
pub fn triangle_cost(mass: usize, alpha: f64) -> f64 {
    if alpha == 0.0 {
        (mass as f64).ln() + 4.0
    } else {
        (mass as f64).powf(alpha)
    }
}

// ---------------------------------------------------------------------------
// Contours

/// A cluster of triangles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Contour {
    pub triangles: Vec<Triangle>,
    pub mass: usize,
    /// `x_-` and `x_+`: the ends of the covering triangle's support.
    pub span: [i64; 2],
}

impl Contour {
    pub fn new(mut triangles: Vec<Triangle>) -> Result<Self> {
        if triangles.is_empty() {
            return domain("a contour has at least one triangle");
        }
        triangles.sort();
        let lo = triangles.iter().map(|t| t.lo).min().unwrap();
        let hi = triangles.iter().map(|t| t.hi).max().unwrap();
        Ok(Self {
            mass: triangles.iter().map(Triangle::mass).sum(),
            span: [lo, hi],
            triangles,
        })
    }

    /// The covering triangle `T(Gamma)`.
    pub fn cover(&self) -> Triangle {
        Triangle {
            lo: self.span[0],
            hi: self.span[1],
        }
    }
}

/// `min` of triangle distances over member pairs.
pub fn contour_distance(a: &Contour, b: &Contour) -> i64 {
    let mut best = i64::MAX;
    for s in &a.triangles {
        for t in &b.triangles {
            best = best.min(triangle_distance(s, t));
        }
    }
    best
}

fn cube(m: usize) -> i64 {
    (m as i64).pow(3)
}

/// Why two contours fail the separation conditions, if they do.
pub fn separation_violation(a: &Contour, b: &Contour, c: u64) -> Option<String> {
    let (ca, cb) = (a.cover(), b.cover());
    let c = c as i64;
    if ca.disjoint(&cb) {
        let d = contour_distance(a, b);
        let limit = c * cube(a.mass).min(cube(b.mass));
        return (d <= limit).then(|| format!("disjoint covers {ca} and {cb} at distance {d} <= {limit}"));
    }
    let (inner, outer) = if ca == cb {
        return Some(format!("equal covers {ca}"));
    } else if cb.contains(&ca) {
        (a, b)
    } else if ca.contains(&cb) {
        (b, a)
    } else {
        return Some(format!("covers {ca} and {cb} cross"));
    };
    let ci = inner.cover();
    if let Some(t) = outer.triangles.iter().find(|t| !t.contains(&ci) && !t.disjoint(&ci)) {
        return Some(format!("member {t} of the outer contour cuts {ci}"));
    }
    let d = contour_distance(inner, outer);
    let limit = c * cube(inner.mass);
    (d <= limit).then(|| format!("inner cover {ci} at distance {d} <= {limit}"))
}

/// Clusters triangles into contours with separation constant `c`.
///
/// Starting from singletons, the first pair of clusters (in sorted order)
/// that violates the separation conditions is merged, until none does.
pub fn decompose_contours(triangles: &[Triangle], c: u64) -> Vec<Contour> {
    let mut sorted = triangles.to_vec();
    sorted.sort();
    let mut clusters: Vec<Contour> = sorted
        .into_iter()
        .map(|t| Contour::new(vec![t]).expect("non-empty"))
        .collect();
    'merge: loop {
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                if separation_violation(&clusters[i], &clusters[j], c).is_some() {
                    let b = clusters.remove(j);
                    let mut members = std::mem::take(&mut clusters[i].triangles);
                    members.extend(b.triangles);
                    clusters[i] = Contour::new(members).expect("non-empty");
                    clusters.sort();
                    continue 'merge;
                }
            }
        }
        break;
    }
    clusters
}

/// Outcome of auditing a contour decomposition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContourReport {
    pub contours: usize,
    pub partition: bool,
    pub separation: bool,
    pub idempotent: bool,
    pub failures: Vec<String>,
}

impl ContourReport {
    pub fn passed(&self) -> bool {
        self.partition && self.separation && self.idempotent
    }
}

/// Checks partition and mass conservation, pairwise separation and that
/// re-decomposing changes nothing.
pub fn verify_contours(triangles: &[Triangle], contours: &[Contour], c: u64) -> ContourReport {
    let mut failures = Vec::new();

    let mut input = triangles.to_vec();
    input.sort();
    let mut output: Vec<Triangle> = contours.iter().flat_map(|g| g.triangles.iter().copied()).collect();
    output.sort();
    let mass_in: usize = input.iter().map(Triangle::mass).sum();
    let mass_out: usize = contours.iter().map(|g| g.mass).sum();
    let mass_ok = contours
        .iter()
        .all(|g| g.mass == g.triangles.iter().map(Triangle::mass).sum::<usize>());
    let partition = input == output && mass_in == mass_out && mass_ok;
    if !partition {
        failures.push(format!("partition: {} triangles in, {} out", input.len(), output.len()));
    }

    let mut separation = true;
    for (k, a) in contours.iter().enumerate() {
        for b in &contours[k + 1..] {
            if let Some(why) = separation_violation(a, b, c) {
                separation = false;
                failures.push(format!("separation: {why}"));
            }
        }
    }

    let mut expected = contours.to_vec();
    expected.sort();
    let again = decompose_contours(&output, c);
    let mut idempotent = again == expected;
    for g in contours {
        if decompose_contours(&g.triangles, c).len() != 1 {
            idempotent = false;
        }
    }
    if !idempotent {
        failures.push("decomposition is not idempotent".into());
    }

    ContourReport {
        contours: contours.len(),
        partition,
        separation,
        idempotent,
        failures,
    }
}

/// Independence check: if the contours of the parts are pairwise separated
/// across parts, the union decomposes into the union of their contours.
/// Returns `None` when the parts are not separated.
pub fn independence_holds(parts: &[Vec<Triangle>], c: u64) -> Option<bool> {
    let decomposed: Vec<Vec<Contour>> = parts.iter().map(|p| decompose_contours(p, c)).collect();
    for (i, a) in decomposed.iter().enumerate() {
        for b in &decomposed[i + 1..] {
            for x in a {
                for y in b {
                    if separation_violation(x, y, c).is_some() {
                        return None;
                    }
                }
            }
        }
    }
    let union: Vec<Triangle> = parts.iter().flatten().copied().collect();
    let mut expected: Vec<Contour> = decomposed.into_iter().flatten().collect();
    expected.sort();
    Some(decompose_contours(&union, c) == expected)
}

// ---------------------------------------------------------------------------
// Peierls estimates

/// Margins `lhs - rhs` of the erasure-cost lower bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeierlsReport {
    pub zeta: f64,
    /// Erasing the `i` smallest triangles, `i = 1..=n`; entry 0 is the
    /// single-triangle bound.
    pub sequential: Vec<f64>,
    /// Erasing each contour from the full family.
    pub contours: Vec<f64>,
}

impl PeierlsReport {
    pub fn min_margin(&self) -> f64 {
        self.sequential
            .iter()
            .chain(&self.contours)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn violations(&self) -> usize {
        self.sequential.iter().chain(&self.contours).filter(|&&m| m < 0.0).count()
    }
}

pub fn peierls_check(triangles: &[Triangle], table: &CouplingTable, c: u64) -> Result<PeierlsReport> {
    let alpha = table.alpha();
    let z = zeta(alpha)?;
    let mut ordered = triangles.to_vec();
    ordered.sort_by_key(|t| (t.mass(), t.lo));

    let mut sequential = Vec::with_capacity(ordered.len());
    let mut cost = 0.0;
    for i in 1..=ordered.len() {
        cost += triangle_cost(ordered[i - 1].mass(), alpha);
        let lhs = erase_energy(&ordered[..i], &ordered, table)?;
        sequential.push(lhs - z * cost);
    }

    let mut contours = Vec::new();
    for g in decompose_contours(triangles, c) {
        let lhs = erase_energy(&g.triangles, triangles, table)?;
        let cost: f64 = g.triangles.iter().map(|t| triangle_cost(t.mass(), alpha)).sum();
        contours.push(lhs - 0.5 * z * cost);
    }
    Ok(PeierlsReport {
        zeta: z,
        sequential,
        contours,
    })
}

// ---------------------------------------------------------------------------
// Separation constant and entropy sums

/// `sum_{m >= 1} 4m / [c m]^3` for integer `c >= 1`, as `(value, half_width)`.
///
/// Terms up to `N = 10^5` are summed exactly; the tail `4/c^3 sum_{m > N} m^-2`
/// is bracketed by `[4/(c^3 (N+1)), 4/(c^3 N)]`.
pub fn separation_series(c: u64) -> (f64, f64) {
    const N: u64 = 100_000;
    assert!(c >= 1);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for m in (1..=N).rev() {
        let cm = (c * m) as f64;
        let term = 4.0 * m as f64 / (cm * cm * cm);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let scale = 4.0 / (c * c * c) as f64;
    let lo = scale / (N + 1) as f64;
    let hi = scale / N as f64;
    (sum + 0.5 * (lo + hi), 0.5 * (hi - lo))
}

/// Smallest integer `C` whose series is rigorously at most 1/2.
pub fn min_separation_constant() -> u64 {
    (1..)
        .find(|&c| {
            let (v, hw) = separation_series(c);
            v + hw <= 0.5
        })
        .expect("the series decreases like C^-3")
}

pub const DEFAULT_SEPARATION: u64 = 3;

/// `prod_{T in Gamma} exp(-b cost(|T|))`.
pub fn contour_weight(contour: &Contour, b: f64, alpha: f64) -> Result<f64> {
    if contour.triangles.is_empty() {
        return domain("a contour has at least one triangle");
    }
    if !(b >= 0.0) {
        return domain(format!("weight parameter must be non-negative, got {b}"));
    }
    let cost: f64 = contour.triangles.iter().map(|t| triangle_cost(t.mass(), alpha)).sum();
    Ok((-b * cost).exp())
}

/// Which contours count as containing the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginConvention {
    /// The origin lies in the support of the covering triangle.
    #[default]
    CoveringTriangle,
    /// The origin lies in the support of some member triangle.
    MemberSupport,
}

pub const MAX_ENTROPY_MASS: usize = 4;

/// Enumerated contour sum at fixed mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySum {
    pub m: usize,
    pub b: f64,
    pub alpha: f64,
    pub c: u64,
    pub count: usize,
    pub sum: f64,
    pub bound: f64,
    pub holds: bool,
}

/// All contours of mass `m` containing the origin, with supports inside
/// `[-C m^3 - m, C m^3 + m]`.
pub fn enumerate_contours(m: usize, c: u64, convention: OriginConvention) -> Result<Vec<Contour>> {
    if m == 0 || m > MAX_ENTROPY_MASS {
        return Err(Error::Size {
            sites: m,
            cap: MAX_ENTROPY_MASS,
        });
    }
    let reach = c as i64 * cube(m) + m as i64;
    let window = Interval { lo: -reach, hi: reach };
    let mut found = Vec::new();
    let mut chosen = Vec::new();
    extend_family(m, c as i64, window, &mut chosen, &mut |family: &[Triangle]| {
        let lo = family.iter().map(|t| t.lo).min().unwrap();
        let hi = family.iter().map(|t| t.hi).max().unwrap();
        let has_origin = match convention {
            OriginConvention::CoveringTriangle => lo <= 0 && 0 <= hi,
            OriginConvention::MemberSupport => family.iter().any(|t| t.lo <= 0 && 0 <= t.hi),
        };
        if has_origin && is_realizable(family) {
            let contours = decompose_contours(family, c);
            if contours.len() == 1 {
                found.extend(contours);
            }
        }
    });
    Ok(found)
}

/// Triangles are appended in increasing `(lo, hi)` order. A new triangle
/// starting after everything chosen so far opens a gap; the two sides can
/// only end up in one contour if the gap is at most `C min(k, m - k)^3`.
fn extend_family<F: FnMut(&[Triangle])>(
    remaining_total: usize,
    c: i64,
    window: Interval,
    chosen: &mut Vec<Triangle>,
    emit: &mut F,
) {
    let used: usize = chosen.iter().map(Triangle::mass).sum();
    let remaining = remaining_total - used;
    if remaining == 0 {
        emit(chosen);
        return;
    }
    let (start, reach_hi) = match chosen.last() {
        Some(last) => (last.lo, chosen.iter().map(|t| t.hi).max().unwrap()),
        // The leftmost triangle carries the left end of the cover, which
        // must not lie right of the origin.
        None => (window.lo, i64::MIN),
    };
    let stop = if chosen.is_empty() { 0 } else { window.hi };
    let gap_limit = c * cube(used.min(remaining));
    for lo in start..=stop {
        if !chosen.is_empty() && lo - reach_hi > gap_limit {
            break;
        }
        for mass in 1..=remaining {
            let hi = lo + mass as i64 - 1;
            if hi > window.hi {
                break;
            }
            let t = Triangle { lo, hi };
            if let Some(last) = chosen.last() {
                if t <= *last {
                    continue;
                }
            }
            chosen.push(t);
            extend_family(remaining_total, c, window, chosen, emit);
            chosen.pop();
        }
    }
}

/// `sum_{0 in Gamma, |Gamma| = m} w_b(Gamma)` against `2 m exp(-b cost(m))`.
pub fn entropy_sum(m: usize, b: f64, alpha: f64, c: u64, convention: OriginConvention) -> Result<EntropySum> {
    let contours = enumerate_contours(m, c, convention)?;
    let mut sum = 0.0;
    for g in &contours {
        sum += contour_weight(g, b, alpha)?;
    }
    let bound = 2.0 * m as f64 * (-b * triangle_cost(m, alpha)).exp();
    Ok(EntropySum {
        m,
        b,
        alpha,
        c,
        count: contours.len(),
        sum,
        bound,
        holds: sum <= bound,
    })
}

/// One JSON object per line.
pub fn to_json_lines<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("plain data serializes"));
        out.push('\n');
    }
    out
}
