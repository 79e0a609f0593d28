use num_complex::Complex64;

/// Hermitian matrix with two off-diagonals, stored by its upper band.
/// `off[d - 1][i]` is the entry (i, i + d).
#[derive(Debug, Clone, PartialEq)]
pub struct BandedHermitian {
    pub diag: Vec<f64>,
    pub off: [Vec<Complex64>; 2],
}

pub const BANDWIDTH: usize = 2;

impl BandedHermitian {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Adds `v` at (i, j) and its conjugate at (j, i); i < j <= i + 2.
    pub fn add_upper(&mut self, i: usize, j: usize, v: Complex64) {
        let (i, j, v) = if i < j { (i, j, v) } else { (j, i, v.conj()) };
        let d = j - i;
        assert!((1..=BANDWIDTH).contains(&d), "entry ({i}, {j}) outside the band");
        self.off[d - 1][i] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i == j {
            return Complex64::new(self.diag[i], 0.0);
        }
        let (a, b, conj) = if i < j { (i, j, false) } else { (j, i, true) };
        let d = b - a;
        if d > BANDWIDTH {
            return Complex64::new(0.0, 0.0);
        }
        let v = self.off[d - 1][a];
        if conj {
            v.conj()
        } else {
            v
        }
    }

    pub fn max_abs(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.off.iter().flatten().fold(d, |m, v| m.max(v.norm()))
    }
}

/// Unit lower triangular factor with two subdiagonals and the real diagonal
/// of A - sigma B = L D L^H, computed without pivoting.
pub struct Ldl {
    pub d: Vec<f64>,
    /// `l[k - 1][i]` is L(i, i - k)
    pub l: [Vec<Complex64>; 2],
}

/// Factors K - sigma diag(b). Pivots smaller than `pivmin` in magnitude are
/// replaced by -pivmin, which keeps Sturm counts consistent.
pub fn factor_shifted(k: &BandedHermitian, b: &[f64], sigma: f64, pivmin: f64) -> Ldl {
    let n = k.dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut d = vec![0.0; n];
    let mut l = [vec![zero; n], vec![zero; n]];
    for j in 0..n {
        // d_j = a_jj - sum_k |L_jk|^2 d_k
        let mut dj = k.diag[j] - sigma * b[j];
        for s in 1..=BANDWIDTH.min(j) {
            let ljs = l[s - 1][j];
            dj -= (ljs.norm() * d[j - s]) * ljs.norm();
        }
        if dj.abs() < pivmin {
            dj = -pivmin;
        }
        d[j] = dj;
        // L_ij for i = j+1, j+2: (a_ij - sum_k L_ik conj(L_jk) d_k) / d_j
        for s in 1..=BANDWIDTH {
            let i = j + s;
            if i >= n {
                break;
            }
            let mut a = k.off[s - 1][j].conj();
            // common columns c < j with i - c <= 2 and j - c <= 2
            for c in i.saturating_sub(BANDWIDTH)..j {
                let lic = l[i - c - 1][i];
                let ljc = l[j - c - 1][j];
                a -= lic * d[c] * ljc.conj();
            }
            l[s - 1][i] = a / dj;
        }
    }
    Ldl { d, l }
}

impl Ldl {
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    /// Solves L D L^H x = rhs in place.
    pub fn solve(&self, x: &mut [Complex64]) {
        let n = x.len();
        for i in 0..n {
            for s in 1..=BANDWIDTH.min(i) {
                let t = self.l[s - 1][i] * x[i - s];
                x[i] -= t;
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for s in 1..=BANDWIDTH {
                if i + s < n {
                    let t = self.l[s - 1][i + s].conj() * x[i + s];
                    x[i] -= t;
                }
            }
        }
    }
}
