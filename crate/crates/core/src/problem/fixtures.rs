//! Published test matrices, embedded at their printed precision.

use crate::matkernel::{c64, CMatrix};

type Entry = (f64, f64);

fn dense(n: usize, entries: &[Entry]) -> CMatrix {
    assert_eq!(entries.len(), n * n);
    CMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[i * n + j];
        c64::new(re, im)
    })
}

fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                out[(off + i, off + j)] = b[(i, j)];
            }
        }
        off += b.nrows();
    }
    out
}

/// 5×5 pair whose doubling iteration with `α = 1` reaches `σ(F) ≈ 1` at step five.
#[rustfmt::skip]
pub fn breakdown() -> (CMatrix, CMatrix) {
    let a = [
        (0.6607, 0.0), (0.1299, -0.1365), (0.0632, -0.0086), (-0.0341, -0.0517), (-0.0628, -0.0044),
        (0.1299, 0.1365), (0.2441, 0.0), (-0.1293, -0.1035), (-0.0363, 0.1567), (0.1042, 0.1260),
        (0.0632, 0.0086), (-0.1293, 0.1035), (0.6772, 0.0), (0.0236, 0.0491), (0.0542, 0.0113),
        (-0.0341, 0.0517), (-0.0363, -0.1567), (0.0236, -0.0491), (0.6804, 0.0), (-0.0326, 0.0427),
        (-0.0628, 0.0044), (0.1042, -0.1260), (0.0542, -0.0113), (-0.0326, -0.0427), (0.6787, 0.0),
    ];
    let b = [
        (-0.5704, 0.2984), (-0.4605, -0.0324), (0.1693, -0.3006), (-0.1181, 0.4597), (0.2109, 0.0879),
        (-0.4605, -0.0324), (0.0573, -0.1759), (-0.1520, 0.0419), (-0.1526, -0.0408), (0.1452, -0.2288),
        (0.1693, -0.3006), (-0.1520, 0.0419), (0.4908, -0.7534), (0.1880, -0.0406), (-0.1733, -0.1743),
        (-0.1181, 0.4597), (-0.1526, -0.0408), (0.1880, -0.0406), (-0.1783, -0.6552), (-0.5212, 0.1871),
        (0.2109, 0.0879), (0.1452, -0.2288), (-0.1733, -0.1743), (-0.5212, 0.1871), (-0.2548, -0.7032),
    ];
    (dense(5, &a), dense(5, &b))
}

/// The printed `F₅` of the breakdown run, used to check the singular value probe.
#[rustfmt::skip]
pub fn breakdown_f5() -> CMatrix {
    let f = [
        (-0.9956, -0.6352), (-0.7338, 0.3015), (0.2834, 0.6319), (-0.1291, -0.8499), (0.4238, -0.2379),
        (-0.7338, 0.3015), (-0.5359, 0.0786), (-0.3942, -0.2753), (-0.4018, 0.2612), (0.3380, 0.6318),
        (0.2834, 0.6319), (-0.3942, -0.2753), (0.9025, 1.2909), (0.2689, 0.0968), (-0.3410, 0.3895),
        (-0.1291, -0.8499), (-0.4018, 0.2612), (0.2689, 0.0968), (-0.2733, 1.2440), (-0.8719, -0.3476),
        (0.4238, -0.2379), (0.3380, 0.6318), (-0.3410, 0.3895), (-0.8719, -0.3476), (-0.4230, 1.2122),
    ];
    dense(5, &f)
}

/// 7×7 block-diagonal pair with a defective eigenvalue near `±4.12e-3`.
#[rustfmt::skip]
pub fn defective() -> (CMatrix, CMatrix) {
    let a1 = dense(3, &[
        (2.6361, 0.0), (1.0378e1, 0.0), (5.0751e-2, 0.0),
        (1.0378e1, 0.0), (5.2431e-2, 0.0), (-4.6067e-1, 0.0),
        (5.0751e-2, 0.0), (-4.6067e-1, 0.0), (-1.6892e-2, 0.0),
    ]);
    let a2 = dense(2, &[
        (-4.0549e-1, 0.0), (-3.7710, 2.7569),
        (-3.7710, -2.7569), (-4.0549e-1, 0.0),
    ]);
    let a3 = dense(2, &[
        (3.6378e-1, 0.0), (2.7293e-1, 3.5908),
        (2.7293e-1, -3.5908), (3.6378e-1, 0.0),
    ]);
    let b1 = dense(3, &[
        (-2.6361, 0.0), (-1.0375e1, 0.0), (-5.1181e-2, 0.0),
        (-1.0375e1, 0.0), (-5.3457e-2, 0.0), (5.0988e-1, 0.0),
        (-5.1181e-2, 0.0), (5.0988e-1, 0.0), (4.2022e-3, 0.0),
    ]);
    let b2 = dense(2, &[
        (1.2343e-1, -3.8788e-1), (3.7566, -2.7464),
        (3.7566, -2.7464), (4.0704e-1, 6.0156e-5),
    ]);
    let b3 = dense(2, &[
        (3.6148e-1, -5.5211e-2), (-2.7152e-1, -3.5722),
        (-2.7152e-1, -3.5722), (-3.6567e-1, 5.9265e-5),
    ]);
    (block_diag(&[a1, a2, a3]), block_diag(&[b1, b2, b3]))
}
