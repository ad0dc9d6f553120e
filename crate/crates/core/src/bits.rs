//! Small helpers for subsets of `0..n` stored as `u32` bitmasks.

/// Iterator over the set bits of a mask, lowest first.
#[derive(Clone, Copy, Debug)]
pub struct Ones(u32);

impl Iterator for Ones {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}

pub fn ones(mask: u32) -> Ones {
    Ones(mask)
}

pub fn elements(mask: u32) -> Vec<usize> {
    ones(mask).collect()
}

pub fn size(mask: u32) -> usize {
    mask.count_ones() as usize
}

pub fn full(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub fn is_subset(a: u32, b: u32) -> bool {
    a & !b == 0
}

/// Builds a mask from element indices, returning the first out-of-range index on failure.
pub fn from_elements(items: &[usize], n: usize) -> Result<u32, usize> {
    let mut mask = 0u32;
    for &x in items {
        if x >= n || x >= 32 {
            return Err(x);
        }
        mask |= 1 << x;
    }
    Ok(mask)
}

/// All `k`-subsets of `0..n` in colexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(0);
        return out;
    }
    // Gosper's hack
    let mut s: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while s < limit {
        out.push(s as u32);
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
    out
}

/// Sort key that orders sets by their sorted element lists.
pub fn lex_key(mask: u32) -> Vec<usize> {
    elements(mask)
}
