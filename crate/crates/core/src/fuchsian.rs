//! The Bolza group, its octagonal fundamental domain and conjugacy classes.
//!
//! Generators are the side pairings of the regular octagon with angles
//! `pi/4`: letter `k` translates by `2 r_in` in direction `k pi / 4`, and
//! letter `k + 4` is its inverse. Words print as `a b c d` for letters
//! `0..4` and `A B C D` for their inverses.
//!
//! Classes are found geometrically. Every primitive closed geodesic of
//! length at most `L` has a representative whose axis crosses the domain
//! `F`; such elements move the origin by at most
//! `2 asinh(cosh(R_F) sinh(L / 2))`, so a breadth first search of the orbit
//! of the origin up to that radius finds all of them. Each representative is
//! then walked along its axis through the tiling, which yields its cutting
//! sequence; the canonical word is the shortlex minimum over rotations of
//! that sequence and of its inverse.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::disk::{to_klein, Su11, Su11Dd, C64};
use crate::exact::ExactSu11;
use crate::error::{Error, Result};

/// Geometry of the regular octagon with interior angles `pi/4`.
#[derive(Clone, Debug)]
pub struct Octagon {
    /// Hyperbolic inradius, `cosh r_in = 1 + sqrt 2`.
    pub r_in: f64,
    /// Hyperbolic circumradius.
    pub r_f: f64,
    /// Euclidean radius of side midpoints.
    pub mid: f64,
    /// Distance of each side line from the origin in the Klein model.
    pub klein_d: f64,
    /// Outward unit normals of the sides.
    pub normals: [C64; 8],
}

impl Octagon {
    pub fn get() -> &'static Octagon {
        static O: OnceLock<Octagon> = OnceLock::new();
        O.get_or_init(|| {
            let r_in = (1.0 + 2f64.sqrt()).acosh();
            let t = r_in.tanh();
            let r_f = (t / (std::f64::consts::PI / 8.0).cos()).atanh();
            let mut normals = [C64::new(0.0, 0.0); 8];
            for (k, n) in normals.iter_mut().enumerate() {
                *n = C64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_4);
            }
            Octagon { r_in, r_f, mid: (0.5 * r_in).tanh(), klein_d: t, normals }
        })
    }

    /// Signed violation of side `k` by a Klein point; positive means outside.
    #[inline]
    pub fn klein_violation(&self, k: usize, q: C64) -> f64 {
        let n = self.normals[k];
        q.re * n.re + q.im * n.im - self.klein_d
    }

    pub fn contains(&self, z: C64, tol: f64) -> bool {
        let q = to_klein(z);
        (0..8).all(|k| self.klein_violation(k, q) <= tol)
    }

    /// Parameter interval of the Klein chord `a -> b` inside the closed domain.
    pub fn chord_interval(&self, a: C64, b: C64, tol: f64) -> Option<(f64, f64)> {
        let d = b - a;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for n in &self.normals {
            let s = n.re * d.re + n.im * d.im;
            let r = self.klein_d + tol - (n.re * a.re + n.im * a.im);
            if s.abs() < 1e-300 {
                if r < 0.0 {
                    return None;
                }
                continue;
            }
            let t = r / s;
            if s > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Side through which the oriented chord `a -> b` leaves the domain.
    ///
    /// Ties at vertices are broken as if the chord were pushed slightly to its
    /// left, which is an orientation invariant rule and therefore gives the
    /// same cutting sequence from every starting tile.
    pub fn exit_side(&self, a: C64, b: C64) -> usize {
        let d = b - a;
        let m = C64::new(-d.im, d.re) / d.norm();
        let mut best: Option<(usize, f64, f64)> = None;
        for (k, n) in self.normals.iter().enumerate() {
            let ga = self.klein_d - (n.re * a.re + n.im * a.im);
            let gb = self.klein_d - (n.re * b.re + n.im * b.im);
            let nm = n.re * m.re + n.im * m.im;
            // chords along a side line are decided by the push direction
            if ga.abs() < 1e-11 && gb.abs() < 1e-11 {
                continue;
            }
            let s = ga - gb;
            if s <= 0.0 {
                continue;
            }
            let t = ga / s;
            let tau = -nm / s;
            let better = match best {
                None => true,
                Some((_, bt, btau)) => {
                    if (t - bt).abs() <= 1e-10 {
                        tau < btau - 1e-12
                    } else {
                        t < bt
                    }
                }
            };
            if better {
                best = Some((k, t, tau));
            }
        }
        best.map(|b| b.0).unwrap_or(0)
    }
}

/// Euclidean length of the Klein chord of `c`, pushed slightly to its left,
/// inside the domain.
fn perturbed_crossing(c: &Su11Dd) -> f64 {
    let Some((a, b)) = c.axis_endpoints() else { return 0.0 };
    let d = b - a;
    let shift = C64::new(-d.im, d.re) / d.norm() * 1e-7;
    match Octagon::get().chord_interval(a + shift, b + shift, 0.0) {
        Some((lo, hi)) => (hi - lo) * d.norm(),
        None => 0.0,
    }
}

/// Words over the eight side-pairing letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word(pub Vec<u8>);

#[inline]
pub fn inverse_letter(k: u8) -> u8 {
    (k + 4) % 8
}

impl Word {
    pub fn new(letters: Vec<u8>) -> Word {
        Word(letters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&k| inverse_letter(k)).collect())
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        Word(v)
    }

    pub fn power(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    /// Free reduction.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<u8> = Vec::with_capacity(self.0.len());
        for &k in &self.0 {
            if out.last() == Some(&inverse_letter(k)) {
                out.pop();
            } else {
                out.push(k);
            }
        }
        Word(out)
    }

    /// Free and cyclic reduction.
    pub fn cyclically_reduced(&self) -> Word {
        let mut w = self.reduced().0;
        while w.len() >= 2 && w[0] == inverse_letter(w[w.len() - 1]) {
            w.pop();
            w.remove(0);
        }
        Word(w)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        *self == self.cyclically_reduced()
    }

    pub fn rotation(&self, r: usize) -> Word {
        let n = self.0.len();
        Word((0..n).map(|i| self.0[(i + r) % n]).collect())
    }

    /// Shortlex minimum over rotations of the word and of its inverse.
    pub fn min_rotation_with_inverse(&self) -> Word {
        let inv = self.inverse();
        let n = self.0.len();
        let mut best = self.clone();
        for r in 0..n {
            for cand in [self.rotation(r), inv.rotation(r)] {
                if shortlex_less(&cand, &best) {
                    best = cand;
                }
            }
        }
        best
    }
}

pub fn shortlex_less(a: &Word, b: &Word) -> bool {
    (a.0.len(), &a.0) < (b.0.len(), &b.0)
}

const LETTERS: [char; 8] = ['a', 'b', 'c', 'd', 'A', 'B', 'C', 'D'];

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &k in &self.0 {
            write!(f, "{}", LETTERS[k as usize])?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        if s == "1" {
            return Ok(Word::default());
        }
        s.chars()
            .map(|c| {
                LETTERS
                    .iter()
                    .position(|&l| l == c)
                    .map(|p| p as u8)
                    .ok_or_else(|| Error::Invalid(format!("bad letter {c:?} in word {s:?}")))
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for Word {
    type Error = Error;
    fn try_from(s: String) -> Result<Word> {
        s.parse()
    }
}

/// A free homotopy class of closed geodesics, up to orientation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    /// Canonical cyclically reduced word.
    pub word: Word,
    /// Hyperbolic length.
    pub l0: f64,
    /// Power of the primitive root, 1 for primitive classes.
    pub power: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerateOptions {
    pub include_powers: bool,
    pub max_classes: usize,
    pub max_elements: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { include_powers: false, max_classes: 200_000, max_elements: 8_000_000 }
    }
}

/// Result of walking an axis once around its closed geodesic.
#[derive(Clone, Debug)]
pub struct AxisWalk {
    /// Cutting sequence of the primitive root, starting at `start`.
    pub letters: Vec<u8>,
    /// Conjugate of the input whose axis crosses the domain where the walk began.
    pub start: ExactSu11,
    pub length: f64,
    pub primitive_length: f64,
    pub power: u32,
}

/// Canonical description of a conjugacy class.
#[derive(Clone, Debug, PartialEq)]
pub struct Canonical {
    pub word: Word,
    pub primitive: Word,
    pub power: u32,
    pub length: f64,
}

/// Quantized index of disk points for orbit deduplication.
pub(crate) struct PointIndex {
    cells: HashMap<(i64, i64), Vec<u32>>,
    q: f64,
}

impl PointIndex {
    pub(crate) fn new(q: f64) -> Self {
        PointIndex { cells: HashMap::new(), q }
    }

    fn cell(&self, z: C64) -> (i64, i64) {
        ((z.re / self.q).floor() as i64, (z.im / self.q).floor() as i64)
    }

    pub(crate) fn find(&self, z: C64, pts: impl Fn(u32) -> C64, tol: f64) -> Option<u32> {
        let (cx, cy) = self.cell(z);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &i in v {
                        if (pts(i) - z).norm() <= tol {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    pub(crate) fn insert(&mut self, z: C64, i: u32) {
        let c = self.cell(z);
        self.cells.entry(c).or_default().push(i);
    }
}

/// A point reduced into the fundamental domain together with its deck word.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub point: C64,
    /// `h` with `h(z) = point`.
    pub element: Su11,
    /// Sides crossed, in order; their product `W` satisfies `W(point) = z`.
    pub crossings: Vec<u8>,
}

#[derive(Clone, Debug)]
pub struct FuchsianGroup {
    gens: [Su11; 8],
    exact: [ExactSu11; 8],
    order: [u8; 8],
}

impl FuchsianGroup {
    pub fn bolza() -> FuchsianGroup {
        Self::bolza_with_order([0, 1, 2, 3, 4, 5, 6, 7]).expect("identity order")
    }

    /// Bolza group whose searches visit letters in the given order.
    pub fn bolza_with_order(order: [u8; 8]) -> Result<FuchsianGroup> {
        let mut seen = [false; 8];
        for &k in &order {
            if k > 7 || seen[k as usize] {
                return Err(Error::Config(format!("generator order {order:?} is not a permutation of 0..8")));
            }
            seen[k as usize] = true;
        }
        let exact: [ExactSu11; 8] = std::array::from_fn(|k| ExactSu11::generator(k as u8));
        let gens = exact.map(|g| g.to_dd().to_f64());
        Ok(FuchsianGroup { gens, exact, order })
    }

    pub fn order(&self) -> [u8; 8] {
        self.order
    }

    pub fn generator(&self, k: u8) -> Su11 {
        self.gens[k as usize]
    }

    pub fn generator_exact(&self, k: u8) -> ExactSu11 {
        self.exact[k as usize]
    }

    pub fn word_exact(&self, w: &Word) -> Result<ExactSu11> {
        let mut m = ExactSu11::identity();
        for &k in &w.0 {
            m = m.mul(&self.exact[k as usize])?;
        }
        Ok(m)
    }

    /// Matrix of a word. Words long enough to overflow exact arithmetic fall
    /// back to compensated floating point products.
    pub fn word_matrix(&self, w: &Word) -> Su11 {
        match self.word_exact(w) {
            Ok(m) => m.to_dd().to_f64(),
            Err(_) => w.0.iter().fold(Su11::IDENTITY, |m, &k| m.mul(&self.gens[k as usize]).renormalized()),
        }
    }

    pub fn translation_length(&self, w: &Word) -> f64 {
        match self.word_exact(w) {
            Ok(m) => m.to_dd().translation_length(),
            Err(_) => self.word_matrix(w).translation_length(),
        }
    }

    /// The defining relation, read around the octagon.
    pub fn relator() -> Word {
        Word(vec![0, 5, 2, 7, 4, 1, 6, 3])
    }

    /// Words `a1, b1, a2, b2` with `[a1, b1][a2, b2] = 1`.
    pub fn symplectic_basis() -> [Word; 4] {
        [Word(vec![0, 5]), Word(vec![2, 7, 5]), Word(vec![2]), Word(vec![7])]
    }

    /// Systole `2 acosh(1 + sqrt 2)`.
    pub fn systole() -> f64 {
        2.0 * (1.0 + 2f64.sqrt()).acosh()
    }

    /// First side in the search order that `z` lies beyond by more than `tol`.
    pub fn exit_letter(&self, z: C64, tol: f64) -> Option<u8> {
        let oct = Octagon::get();
        let q = to_klein(z);
        self.order.iter().copied().find(|&k| oct.klein_violation(k as usize, q) > tol)
    }

    /// Reduce a point into the closed fundamental domain.
    pub fn reduce_point(&self, z: C64) -> Result<Reduced> {
        let mut p = z;
        let mut h = Su11::IDENTITY;
        let mut crossings = Vec::new();
        for _ in 0..10_000 {
            match self.exit_letter(p, 1e-13) {
                None => return Ok(Reduced { point: p, element: h, crossings }),
                Some(k) => {
                    let g = self.gens[inverse_letter(k) as usize];
                    p = g.apply(p);
                    h = g.mul(&h).renormalized();
                    crossings.push(k);
                }
            }
        }
        Err(Error::Convergence(format!("point {z} did not reduce into the domain")))
    }

    /// Walk the axis of a hyperbolic element once around its closed geodesic.
    pub fn walk_axis(&self, gamma: &ExactSu11) -> Result<AxisWalk> {
        let oct = Octagon::get();
        let length = gamma.to_dd().translation_length();
        if length <= 1e-9 {
            return Err(Error::Invalid("element is not hyperbolic".into()));
        }
        let start = self.robust_conjugate(gamma)?;
        let max_steps = (40.0 * length + 200.0) as usize;
        let mut cur = start;
        let mut letters = Vec::new();
        loop {
            let (a, b) = cur
                .to_dd()
                .axis_endpoints()
                .ok_or_else(|| Error::Invalid("lost hyperbolicity during walk".into()))?;
            let k = oct.exit_side(a, b) as u8;
            letters.push(k);
            cur = cur.conjugate_by(&self.exact[k as usize])?;
            if cur == start {
                break;
            }
            if letters.len() > max_steps {
                return Err(Error::Convergence(format!("axis walk exceeded {max_steps} steps")));
            }
        }
        let prim = self.translation_length(&Word(letters.clone()));
        let power = (length / prim).round().max(1.0) as u32;
        Ok(AxisWalk { letters, start, length, primitive_length: prim, power })
    }

    /// A conjugate of `gamma` whose axis, pushed slightly to its left,
    /// crosses the domain; the widest such crossing found is used.
    fn robust_conjugate(&self, gamma: &ExactSu11) -> Result<ExactSu11> {
        let oct = Octagon::get();
        let mut gamma = *gamma;
        let mut pulled = false;
        for _ in 0..10_000 {
            let (m, p) = gamma
                .to_dd()
                .axis_endpoints()
                .ok_or_else(|| Error::Invalid("element is not hyperbolic".into()))?;
            let k = (m + p) * 0.5;
            match self.order.iter().copied().find(|&j| oct.klein_violation(j as usize, k) > 1e-12) {
                None => {
                    pulled = true;
                    break;
                }
                Some(j) => gamma = gamma.conjugate_by(&self.exact[j as usize])?,
            }
        }
        if !pulled {
            return Err(Error::Convergence("axis did not approach the domain".into()));
        }
        let g = gamma.to_dd().to_f64();
        let (m, p) = g.axis_endpoints().ok_or_else(|| Error::Invalid("element is not hyperbolic".into()))?;
        let k = (m + p) * 0.5;
        let q = k / (1.0 + (1.0 - k.norm_sqr()).max(0.0).sqrt());
        let base = Su11::to_point(q);
        let theta = base.inv().apply(p).arg();
        let frame = base.mul(&Su11::rotation(theta));
        let l = g.translation_length().max(0.5);
        let step = 0.173;
        let mut best: Option<(f64, ExactSu11)> = None;
        let mut s = 0.0f64;
        while s <= l + step {
            let x = frame.apply(C64::new((0.5 * s).tanh(), 0.0));
            let red = self.reduce_point(x)?;
            let mut cand = gamma;
            for &c in &red.crossings {
                cand = cand.conjugate_by(&self.exact[c as usize])?;
            }
            let mut options = vec![cand];
            for j in 0..8 {
                options.push(cand.conjugate_by(&self.exact[j])?);
            }
            for c in options {
                let width = perturbed_crossing(&c.to_dd());
                if best.as_ref().is_none_or(|(w, _)| width > *w) {
                    best = Some((width, c));
                }
            }
            if best.as_ref().is_some_and(|(w, _)| *w > 1e-3) {
                break;
            }
            s += step;
        }
        match best {
            Some((w, c)) if w > 1e-9 => Ok(c),
            _ => Err(Error::Convergence("no crossing of the domain found along the axis".into())),
        }
    }

    /// Canonical form of the conjugacy class of a word.
    pub fn canonicalize(&self, w: &Word) -> Result<Canonical> {
        let w = w.cyclically_reduced();
        if w.is_empty() {
            return Err(Error::Invalid("the trivial word has no closed geodesic".into()));
        }
        let m = self.word_exact(&w)?;
        self.canonicalize_element(&m)
    }

    pub fn canonicalize_element(&self, m: &ExactSu11) -> Result<Canonical> {
        let fwd = self.walk_axis(m)?;
        let primitive = self.primitive_canonical(m, &fwd)?;
        Ok(Canonical {
            word: primitive.power(fwd.power as usize),
            primitive,
            power: fwd.power,
            length: fwd.length,
        })
    }

    /// Shortlex minimum over the cutting sequences of both orientations.
    ///
    /// Geodesics running along tiling edges have different cutting sequences
    /// in the two directions because the push is always to the left.
    fn primitive_canonical(&self, m: &ExactSu11, fwd: &AxisWalk) -> Result<Word> {
        let back = self.walk_axis(&m.inv())?;
        let a = Word(fwd.letters.clone()).min_rotation_with_inverse();
        let b = Word(back.letters).min_rotation_with_inverse();
        Ok(if shortlex_less(&b, &a) { b } else { a })
    }

    pub fn is_primitive(&self, w: &Word) -> Result<bool> {
        Ok(self.canonicalize(w)?.power == 1)
    }

    /// Search radius for representatives of classes up to length `cap`.
    pub fn search_radius(cap: f64) -> f64 {
        2.0 * (Octagon::get().r_f.cosh() * (0.5 * cap).sinh()).asinh()
    }

    /// All classes of closed geodesics with length at most `cap`, each
    /// counted once regardless of orientation, sorted by length then word.
    pub fn enumerate_classes(&self, cap: f64, opts: &EnumerateOptions) -> Result<Vec<ClassRecord>> {
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::Config(format!("length cap must be positive, got {cap}")));
        }
        let oct = Octagon::get();
        let radius = Self::search_radius(cap);
        let a_max = (0.5 * radius).cosh() * (1.0 + 1e-12);
        let mut elems: Vec<Su11> = vec![Su11::IDENTITY];
        let mut parent: Vec<(u32, u8)> = vec![(u32::MAX, 0)];
        let mut index = PointIndex::new(1e-8);
        index.insert(C64::new(0.0, 0.0), 0);
        let mut queue = VecDeque::from([0u32]);
        let orbit = |e: &Su11| e.b / e.a.conj();
        while let Some(i) = queue.pop_front() {
            let e = elems[i as usize];
            for &k in &self.order {
                let c = self.gens[k as usize].mul(&e);
                if c.a.norm() > a_max {
                    continue;
                }
                let z = orbit(&c);
                if index.find(z, |j| orbit(&elems[j as usize]), 1e-9).is_some() {
                    continue;
                }
                if elems.len() >= opts.max_elements {
                    return Err(Error::Resource(format!(
                        "orbit search exceeded {} elements at cap {cap}",
                        opts.max_elements
                    )));
                }
                let id = elems.len() as u32;
                elems.push(c.renormalized());
                parent.push((i, k));
                index.insert(z, id);
                queue.push_back(id);
            }
        }
        let word_of = |mut i: u32| {
            let mut w = Vec::new();
            while parent[i as usize].0 != u32::MAX {
                w.push(parent[i as usize].1);
                i = parent[i as usize].0;
            }
            Word(w)
        };
        let mut visited: HashSet<ExactSu11> = HashSet::new();
        let mut classes: HashMap<Word, ClassRecord> = HashMap::new();
        let mut seen_words: HashSet<Word> = HashSet::new();
        for i in 1..elems.len() as u32 {
            let e = elems[i as usize];
            let l = e.translation_length();
            if l <= 1e-9 || l > cap + 1e-9 {
                continue;
            }
            let Some((a, b)) = e.axis_endpoints() else { continue };
            if oct.chord_interval(a, b, 1e-9).is_none() {
                continue;
            }
            let m = self.word_exact(&word_of(i))?;
            let key = if m.a.re.0[0] < 0 || (m.a.re.0[0] == 0 && m.a.re.0 < [0; 4]) { neg(&m) } else { m };
            if visited.contains(&key) {
                continue;
            }
            let walk = self.walk_axis(&m)?;
            let mut cur = walk.start;
            for &k in &walk.letters {
                visited.insert(cur);
                visited.insert(neg(&cur));
                cur = cur.conjugate_by(&self.exact[k as usize])?;
            }
            let prim = self.primitive_canonical(&m, &walk)?;
            if !seen_words.insert(prim.clone()) {
                continue;
            }
            let prim_len = self.translation_length(&prim);
            let max_power = if opts.include_powers { (cap / prim_len + 1e-9).floor() as u32 } else { 1 };
            for j in 1..=max_power {
                let word = prim.power(j as usize);
                let l0 = if j == 1 { prim_len } else { self.translation_length(&word) };
                if l0 > cap + 1e-9 {
                    break;
                }
                classes.insert(word.clone(), ClassRecord { word, l0, power: j });
                if classes.len() > opts.max_classes {
                    return Err(Error::Resource(format!(
                        "more than {} classes below length {cap}",
                        opts.max_classes
                    )));
                }
            }
        }
        let mut out: Vec<ClassRecord> = classes.into_values().collect();
        out.sort_by(|x, y| {
            let kx = (x.l0 * 1e9).round() as i64;
            let ky = (y.l0 * 1e9).round() as i64;
            kx.cmp(&ky).then_with(|| (x.word.len(), &x.word.0).cmp(&(y.word.len(), &y.word.0)))
        });
        Ok(out)
    }
}

fn neg(m: &ExactSu11) -> ExactSu11 {
    ExactSu11 { a: -m.a, b: -m.b }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relator_is_trivial() {
        let g = FuchsianGroup::bolza();
        let m = g.word_matrix(&FuchsianGroup::relator());
        let id = Su11::IDENTITY;
        let neg = Su11 { a: -id.a, b: -id.b };
        assert!(m.max_abs_diff(&id).min(m.max_abs_diff(&neg)) < 1e-12);
    }

    #[test]
    fn symplectic_commutator_product_is_trivial() {
        let g = FuchsianGroup::bolza();
        let [a1, b1, a2, b2] = FuchsianGroup::symplectic_basis();
        let comm = |x: &Word, y: &Word| x.concat(y).concat(&x.inverse()).concat(&y.inverse());
        let w = comm(&a1, &b1).concat(&comm(&a2, &b2));
        let m = g.word_matrix(&w);
        assert!((m.a.norm() - 1.0).abs() < 1e-10 && m.b.norm() < 1e-10);
    }

    #[test]
    fn generators_pair_opposite_sides() {
        let g = FuchsianGroup::bolza();
        let oct = Octagon::get();
        for k in 0..8u8 {
            let opposite = -oct.normals[k as usize] * oct.mid;
            let img = g.generator(k).apply(opposite);
            assert!((img - oct.normals[k as usize] * oct.mid).norm() < 1e-14);
        }
    }

    #[test]
    fn octagon_vertex_has_expected_radius() {
        let oct = Octagon::get();
        assert!(((0.5 * oct.r_f).tanh() - 2f64.powf(-0.25)).abs() < 1e-14);
    }

    #[test]
    fn systole_of_single_generator() {
        let g = FuchsianGroup::bolza();
        let l = g.translation_length(&Word(vec![0]));
        assert!((l - FuchsianGroup::systole()).abs() < 1e-13);
    }

    #[test]
    fn words_round_trip_through_strings() {
        let w: Word = "aBcDdA".parse().unwrap();
        assert_eq!(w.to_string(), "aBcDdA");
        assert!("xyz".parse::<Word>().is_err());
    }

    #[test]
    fn reduction_lands_in_domain() {
        let g = FuchsianGroup::bolza();
        let z = C64::new(0.93, -0.31);
        let r = g.reduce_point(z).unwrap();
        assert!(Octagon::get().contains(r.point, 1e-12));
        assert!((r.element.apply(z) - r.point).norm() < 1e-9);
        let w = g.word_matrix(&Word(r.crossings.clone()));
        assert!((w.apply(r.point) - z).norm() < 1e-9);
    }

    #[test]
    fn generator_walk_is_its_own_letter() {
        let g = FuchsianGroup::bolza();
        let c = g.canonicalize(&Word(vec![6])).unwrap();
        assert_eq!(c.power, 1);
        assert_eq!(c.word.len(), 1);
        let c2 = g.canonicalize(&Word(vec![1, 1, 1])).unwrap();
        assert_eq!(c2.power, 3);
    }
}
