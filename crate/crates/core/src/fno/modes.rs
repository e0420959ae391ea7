/// One free Fourier mode: `k` itself is stored, `-k` is its conjugate partner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mode {
    pub k: Vec<i64>,
    /// index of `k` in the FFT array (negative components wrap to the upper half)
    pub flat: usize,
    /// index of `-k`; equal to `flat` only for the zero mode
    pub conj_flat: usize,
}

/// Retained box |k|_inf < κ split into free modes: k = 0 first, then the modes whose
/// first non-zero component is positive, in lexicographic order.
#[derive(Clone, Debug)]
pub struct ModeTable {
    d: usize,
    kappa: usize,
    n: usize,
    free: Vec<Mode>,
}

fn wrap(k: i64, n: usize) -> usize {
    if k >= 0 {
        k as usize
    } else {
        (n as i64 + k) as usize
    }
}

impl ModeTable {
    pub fn new(d: usize, kappa: usize, n: usize) -> Self {
        assert!(kappa >= 1 && 2 * kappa <= n.max(2));
        let side = 2 * kappa - 1;
        let total = side.pow(d as u32);
        let lo = -(kappa as i64 - 1);
        let mut free = Vec::with_capacity(total / 2 + 1);
        for idx in 0..total {
            let mut rem = idx;
            let mut k = vec![0i64; d];
            for a in (0..d).rev() {
                k[a] = lo + (rem % side) as i64;
                rem /= side;
            }
            let first = k.iter().copied().find(|&c| c != 0);
            if matches!(first, Some(c) if c < 0) {
                continue;
            }
            let flat = Self::flat_of(&k, n);
            let neg: Vec<i64> = k.iter().map(|c| -c).collect();
            let conj_flat = Self::flat_of(&neg, n);
            free.push(Mode { k, flat, conj_flat });
        }
        // zero mode sorts to the middle lexicographically; move it to the front
        let zpos = free.iter().position(|m| m.k.iter().all(|&c| c == 0)).unwrap();
        let zero = free.remove(zpos);
        free.insert(0, zero);
        ModeTable { d, kappa, n, free }
    }

    pub fn flat_of(k: &[i64], n: usize) -> usize {
        k.iter().fold(0, |acc, &c| acc * n + wrap(c, n))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn free(&self) -> &[Mode] {
        &self.free
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    /// All retained FFT indices, each once.
    pub fn retained_flats(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.free.len());
        for (f, m) in self.free.iter().enumerate() {
            out.push(m.flat);
            if f > 0 {
                out.push(m.conj_flat);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_wrapping() {
        for d in 1..=3 {
            for kappa in 1..=3 {
                let t = ModeTable::new(d, kappa, 8);
                let total = (2 * kappa - 1).pow(d as u32);
                assert_eq!(t.free_count(), (total + 1) / 2);
                let mut flats = t.retained_flats();
                flats.sort();
                flats.dedup();
                assert_eq!(flats.len(), total);
            }
        }
        let t = ModeTable::new(1, 3, 8);
        let ks: Vec<i64> = t.free().iter().map(|m| m.k[0]).collect();
        assert_eq!(ks, vec![0, 1, 2]);
        assert_eq!(t.free()[2].conj_flat, 6);
    }
}
