//! Colorings of `e`-subsets of `{0, .., N-1}` and Paris-Harrington style
//! homogeneous sets.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::RamseyError;
use crate::arithmetic::validate_sq_inc;

/// `p : [N]^e → r`, stored as an explicit table. Keys are strictly
/// increasing tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleColoring {
    e: usize,
    r: u32,
    n: u64,
    sq_inc: bool,
    table: BTreeMap<Vec<u64>, u32>,
}

impl TupleColoring {
    /// Tabulates `f` on every increasing `e`-tuple below `n`.
    pub fn from_fn(e: usize, r: u32, n: u64, mut f: impl FnMut(&[u64]) -> u32) -> Result<Self, RamseyError> {
        let mut table = BTreeMap::new();
        for_each_subset(n, e, false, |t| {
            table.insert(t.to_vec(), f(t));
        });
        Self::from_table(e, r, n, false, table)
    }

    /// Same as [`TupleColoring::from_fn`], restricted to square-increasing
    /// tuples.
    pub fn sq_inc_from_fn(e: usize, r: u32, n: u64, mut f: impl FnMut(&[u64]) -> u32) -> Result<Self, RamseyError> {
        let mut table = BTreeMap::new();
        for_each_subset(n, e, true, |t| {
            table.insert(t.to_vec(), f(t));
        });
        Self::from_table(e, r, n, true, table)
    }

    pub fn constant(e: usize, n: u64) -> Self {
        let mut table = BTreeMap::new();
        for_each_subset(n, e, false, |t| {
            table.insert(t.to_vec(), 0);
        });
        TupleColoring { e, r: 1, n, sq_inc: false, table }
    }

    /// Validates totality on `[n]^e` (or on its square-increasing part when
    /// `sq_inc`) and the color range.
    pub fn from_table(
        e: usize,
        r: u32,
        n: u64,
        sq_inc: bool,
        table: BTreeMap<Vec<u64>, u32>,
    ) -> Result<Self, RamseyError> {
        let mut expected = 0usize;
        let mut missing = None;
        for_each_subset(n, e, sq_inc, |t| {
            expected += 1;
            if missing.is_none() && !table.contains_key(t) {
                missing = Some(t.to_vec());
            }
        });
        if let Some(t) = missing {
            return Err(RamseyError::NotTotal(t));
        }
        if table.len() != expected {
            return Err(RamseyError::InvalidColoring("table has keys outside the domain".into()));
        }
        if let Some(c) = table.values().find(|c| **c >= r) {
            return Err(RamseyError::ColorOutOfRange { color: *c, colors: r });
        }
        Ok(TupleColoring { e, r, n, sq_inc, table })
    }

    pub fn arity(&self) -> usize {
        self.e
    }

    pub fn colors(&self) -> u32 {
        self.r
    }

    pub fn universe(&self) -> u64 {
        self.n
    }

    pub fn is_sq_inc(&self) -> bool {
        self.sq_inc
    }

    pub fn table(&self) -> &BTreeMap<Vec<u64>, u32> {
        &self.table
    }

    pub fn color(&self, tuple: &[u64]) -> Option<u32> {
        self.table.get(tuple).copied()
    }
}

/// Calls `f` on every increasing `e`-tuple below `n` in lexicographic
/// order, only on square-increasing ones when `sq_inc`.
pub fn for_each_subset(n: u64, e: usize, sq_inc: bool, mut f: impl FnMut(&[u64])) {
    fn go(n: u64, e: usize, sq_inc: bool, cur: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
        if cur.len() == e {
            f(cur);
            return;
        }
        let start = match cur.last() {
            None => 0,
            Some(&l) if sq_inc => match l.checked_mul(l) {
                Some(sq) => sq + 1,
                None => return,
            },
            Some(&l) => l + 1,
        };
        for x in start.max(cur.last().map_or(0, |l| l + 1))..n {
            cur.push(x);
            go(n, e, sq_inc, cur, f);
            cur.pop();
        }
    }
    go(n, e, sq_inc, &mut Vec::with_capacity(e), &mut f);
}

/// Incremental homogeneity check: the color every `e`-subset of `h` gets
/// must equal `color`, looking only at subsets that contain the last element.
fn extends_homogeneously(p: &TupleColoring, h: &[u64], color: &mut Option<u32>) -> bool {
    let e = p.e;
    if e == 0 || h.len() < e {
        return true;
    }
    let (last, rest) = match h.split_last() {
        Some(x) => x,
        None => return true,
    };
    let mut ok = true;
    let mut sub = Vec::with_capacity(e);
    choose(rest, e - 1, &mut |prefix| {
        sub.clear();
        sub.extend_from_slice(prefix);
        sub.push(*last);
        match (p.color(&sub), *color) {
            (None, _) => ok = false,
            (Some(c), None) => *color = Some(c),
            (Some(c), Some(d)) if c != d => ok = false,
            _ => {}
        }
        ok
    });
    ok
}

/// Every `k`-subset of `elems` in lexicographic order; `f` returns `false`
/// to stop.
fn choose(elems: &[u64], k: usize, f: &mut dyn FnMut(&[u64]) -> bool) {
    fn go(elems: &[u64], k: usize, from: usize, cur: &mut Vec<u64>, f: &mut dyn FnMut(&[u64]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in from..elems.len() {
            if elems.len() - i < k - cur.len() {
                break;
            }
            cur.push(elems[i]);
            let go_on = go(elems, k, i + 1, cur, f);
            cur.pop();
            if !go_on {
                return false;
            }
        }
        true
    }
    go(elems, k, 0, &mut Vec::with_capacity(k), f);
}

/// Depth-first search for an increasing `H` starting at `h0` with exactly
/// `target` elements, homogeneous for `p`; `next` gives the least admissible
/// successor of the current last element.
fn search(
    p: &TupleColoring,
    h: &mut Vec<u64>,
    color: Option<u32>,
    target: usize,
    next: &dyn Fn(u64) -> Option<u64>,
) -> bool {
    if h.len() == target {
        return true;
    }
    let Some(start) = h.last().and_then(|l| next(*l)) else {
        return false;
    };
    // not enough room left for the remaining elements
    let need = (target - h.len()) as u64;
    let mut x = start;
    while x < p.n && p.n - x >= need {
        h.push(x);
        let mut c = color;
        if extends_homogeneously(p, h, &mut c) && search(p, h, c, target, next) {
            return true;
        }
        h.pop();
        x += 1;
    }
    false
}

/// Least (by minimum, then lexicographically) `H ⊆ N` with `p` constant on
/// `[H]^e`, `|H| ≥ k` and `|H| > min H`. Exhaustive.
///
/// A subset of a homogeneous set with the same minimum is homogeneous, so it
/// suffices to look for sets of size exactly `max(k, min H + 1)`.
pub fn find_homogeneous(p: &TupleColoring, k: usize) -> Option<Vec<u64>> {
    for h0 in 0..p.n {
        let target = k.max(h0 as usize + 1);
        if (p.n - h0) < target as u64 {
            break;
        }
        let mut h = alloc::vec![h0];
        let mut c = None;
        if extends_homogeneously(p, &h, &mut c) && search(p, &mut h, c, target, &|l| l.checked_add(1)) {
            return Some(h);
        }
    }
    None
}

/// Square-increasing `H` with `p` constant on `[H]^e`, every element above
/// `m` and `|H| > min H + k`. Exhaustive; `H` is the least by minimum, then
/// lexicographically.
pub fn sq_inc_homogeneous(p: &TupleColoring, k: usize, m: u64) -> Option<Vec<u64>> {
    let first = m.checked_add(1)?;
    for h0 in first..p.n {
        let target = (h0 as usize).checked_add(k + 1)?;
        // the smallest square-increasing continuation must still fit
        if !fits_sq_inc(h0, target, p.n) {
            break;
        }
        let mut h = alloc::vec![h0];
        let mut c = None;
        let next = |l: u64| l.checked_mul(l).and_then(|sq| sq.checked_add(1));
        if extends_homogeneously(p, &h, &mut c) && search_sq(p, &mut h, c, target, &next) {
            debug_assert!(validate_sq_inc(&h));
            return Some(h);
        }
    }
    None
}

fn fits_sq_inc(h0: u64, len: usize, n: u64) -> bool {
    let mut x = h0;
    for _ in 1..len {
        match x.checked_mul(x).and_then(|sq| sq.checked_add(1)) {
            Some(y) if y < n => x = y,
            _ => return false,
        }
    }
    x < n
}

fn search_sq(
    p: &TupleColoring,
    h: &mut Vec<u64>,
    color: Option<u32>,
    target: usize,
    next: &dyn Fn(u64) -> Option<u64>,
) -> bool {
    if h.len() == target {
        return true;
    }
    let Some(start) = h.last().and_then(|l| next(*l)) else {
        return false;
    };
    let mut x = start;
    while x < p.n && fits_sq_inc(x, target - h.len(), p.n) {
        h.push(x);
        let mut c = color;
        if extends_homogeneously(p, h, &mut c) && search_sq(p, h, c, target, next) {
            return true;
        }
        h.pop();
        x += 1;
    }
    false
}

/// Least `N` such that every `p : [N]^e → r` has a homogeneous `H` with
/// `|H| ≥ k` and `|H| > min H`, by trying all colorings. Gives up once more
/// than `guard` colorings in total would have to be checked.
pub fn ph_number(e: usize, k: usize, r: u32, guard: u64) -> Result<u64, RamseyError> {
    if r == 0 {
        return Err(RamseyError::InvalidColoring("at least one color is needed".into()));
    }
    let mut spent = 0u64;
    for n in 0u64.. {
        let mut tuples = Vec::new();
        for_each_subset(n, e, false, |t| tuples.push(t.to_vec()));
        let count = (r as u64)
            .checked_pow(u32::try_from(tuples.len()).map_err(|_| RamseyError::GuardExceeded)?)
            .ok_or(RamseyError::GuardExceeded)?;
        spent = spent.checked_add(count).ok_or(RamseyError::GuardExceeded)?;
        if spent > guard {
            return Err(RamseyError::GuardExceeded);
        }
        let mut digits = alloc::vec![0u32; tuples.len()];
        let mut all = true;
        loop {
            let table = tuples.iter().cloned().zip(digits.iter().copied()).collect();
            let p = TupleColoring { e, r, n, sq_inc: false, table };
            if find_homogeneous(&p, k).is_none() {
                all = false;
                break;
            }
            if !next_digits(&mut digits, r) {
                break;
            }
        }
        if all {
            return Ok(n);
        }
    }
    Err(RamseyError::GuardExceeded)
}

/// Odometer step over base-`r` digits; `false` after the last vector.
pub(crate) fn next_digits(digits: &mut [u32], r: u32) -> bool {
    for d in digits.iter_mut().rev() {
        if *d + 1 < r {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}
