//! Rigid alignment of point clouds (Horn's quaternion absolute orientation).
//!
//! Used as the congruence oracle: two samplings of "the same surface up to
//! rigid motion" must align with tiny RMS.

use crate::vec3::{self, Vec3};

/// Jacobi eigen-decomposition of a symmetric 4x4; returns the eigenvector of
/// the largest eigenvalue.
fn dominant_eigenvector(mut a: [[f64; 4]; 4]) -> [f64; 4] {
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..64 {
        // largest off-diagonal element
        let (mut p, mut q, mut big) = (0, 1, 0.0f64);
        for i in 0..4 {
            for j in (i + 1)..4 {
                if a[i][j].abs() > big {
                    big = a[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if big < 1e-14 {
            break;
        }
        let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        for i in 0..4 {
            let (aip, aiq) = (a[i][p], a[i][q]);
            a[i][p] = c * aip - s * aiq;
            a[i][q] = s * aip + c * aiq;
        }
        for j in 0..4 {
            let (apj, aqj) = (a[p][j], a[q][j]);
            a[p][j] = c * apj - s * aqj;
            a[q][j] = s * apj + c * aqj;
        }
        for i in 0..4 {
            let (vip, viq) = (v[i][p], v[i][q]);
            v[i][p] = c * vip - s * viq;
            v[i][q] = s * vip + c * viq;
        }
    }
    let mut best = 0;
    for i in 1..4 {
        if a[i][i] > a[best][best] {
            best = i;
        }
    }
    [v[0][best], v[1][best], v[2][best], v[3][best]]
}

fn quat_to_matrix(q: [f64; 4]) -> [[f64; 3]; 3] {
    let [w, x, y, z] = q;
    [
        [
            w * w + x * x - y * y - z * z,
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            w * w - x * x + y * y - z * z,
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            w * w - x * x - y * y + z * z,
        ],
    ]
}

/// RMS distance of `a` onto `b` after the best proper rigid motion.
pub fn rigid_alignment_rms(a: &[Vec3], b: &[Vec3]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty());
    let n = a.len() as f64;
    let mut ca = [0.0; 3];
    let mut cb = [0.0; 3];
    for (pa, pb) in a.iter().zip(b) {
        ca = vec3::add(ca, *pa);
        cb = vec3::add(cb, *pb);
    }
    ca = vec3::scale(ca, 1.0 / n);
    cb = vec3::scale(cb, 1.0 / n);

    // cross-covariance
    let mut m = [[0.0; 3]; 3];
    for (pa, pb) in a.iter().zip(b) {
        let x = vec3::sub(*pa, ca);
        let y = vec3::sub(*pb, cb);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += x[i] * y[j];
            }
        }
    }
    // Horn's N matrix
    let tr = m[0][0] + m[1][1] + m[2][2];
    let nmat = [
        [tr, m[1][2] - m[2][1], m[2][0] - m[0][2], m[0][1] - m[1][0]],
        [
            m[1][2] - m[2][1],
            m[0][0] - m[1][1] - m[2][2],
            m[0][1] + m[1][0],
            m[2][0] + m[0][2],
        ],
        [
            m[2][0] - m[0][2],
            m[0][1] + m[1][0],
            m[1][1] - m[0][0] - m[2][2],
            m[1][2] + m[2][1],
        ],
        [
            m[0][1] - m[1][0],
            m[2][0] + m[0][2],
            m[1][2] + m[2][1],
            m[2][2] - m[0][0] - m[1][1],
        ],
    ];
    let q = dominant_eigenvector(nmat);
    let r = quat_to_matrix(q);
    let mut ss = 0.0;
    for (pa, pb) in a.iter().zip(b) {
        let x = vec3::sub(*pa, ca);
        let y = vec3::sub(*pb, cb);
        let rx = [
            r[0][0] * x[0] + r[1][0] * x[1] + r[2][0] * x[2],
            r[0][1] * x[0] + r[1][1] * x[1] + r[2][1] * x[2],
            r[0][2] * x[0] + r[1][2] * x[1] + r[2][2] * x[2],
        ];
        ss += vec3::dot(vec3::sub(rx, y), vec3::sub(rx, y));
    }
    (ss / n).sqrt()
}

/// Best alignment allowing an improper motion: returns (rms, reflected).
pub fn congruence_rms(a: &[Vec3], b: &[Vec3]) -> (f64, bool) {
    let direct = rigid_alignment_rms(a, b);
    let mirrored: Vec<Vec3> = a.iter().map(|p| [-p[0], p[1], p[2]]).collect();
    let refl = rigid_alignment_rms(&mirrored, b);
    if refl < direct {
        (refl, true)
    } else {
        (direct, false)
    }
}
