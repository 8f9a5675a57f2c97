use faer::{Mat, MatRef};
#[allow(unused_imports)] // inherent f64 methods exist only when std is linked
use num_traits::Float;

use super::{add, c64, check_finite, check_square, mul, real, scale, solve, sub, ComplexMatrix};
use crate::Result;

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn one_norm(a: MatRef<'_, c64>) -> f64 {
    super::one_norm(a)
}

fn lin(terms: &[(f64, MatRef<'_, c64>)], n: usize) -> ComplexMatrix {
    let mut out = Mat::zeros(n, n);
    for (c, m) in terms {
        out = add(out.as_ref(), scale(*m, real(*c)).as_ref());
    }
    out
}

/// Matrix exponential by Pade(13) scaling and squaring.
pub fn expm(a: MatRef<'_, c64>) -> Result<ComplexMatrix> {
    let n = check_square(a)?;
    check_finite(a, "expm input")?;
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scale(a, real(0.5_f64.powi(s)));
    let id: ComplexMatrix = Mat::identity(n, n);
    let a2 = mul(a.as_ref(), a.as_ref());
    let a4 = mul(a2.as_ref(), a2.as_ref());
    let a6 = mul(a4.as_ref(), a2.as_ref());
    let b = &B13;
    let u_inner = lin(&[(b[13], a6.as_ref()), (b[11], a4.as_ref()), (b[9], a2.as_ref())], n);
    let u_tail = lin(
        &[(b[7], a6.as_ref()), (b[5], a4.as_ref()), (b[3], a2.as_ref()), (b[1], id.as_ref())],
        n,
    );
    let u = mul(a.as_ref(), add(mul(a6.as_ref(), u_inner.as_ref()).as_ref(), u_tail.as_ref()).as_ref());
    let v_inner = lin(&[(b[12], a6.as_ref()), (b[10], a4.as_ref()), (b[8], a2.as_ref())], n);
    let v_tail = lin(
        &[(b[6], a6.as_ref()), (b[4], a4.as_ref()), (b[2], a2.as_ref()), (b[0], id.as_ref())],
        n,
    );
    let v = add(mul(a6.as_ref(), v_inner.as_ref()).as_ref(), v_tail.as_ref());
    let p = add(v.as_ref(), u.as_ref());
    let q = sub(v.as_ref(), u.as_ref());
    let mut r = solve(q.as_ref(), p.as_ref(), "expm Pade denominator")?;
    for _ in 0..s {
        r = mul(r.as_ref(), r.as_ref());
    }
    check_finite(r.as_ref(), "expm result")?;
    Ok(r)
}
