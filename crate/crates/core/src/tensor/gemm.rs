/// `c (+)= op(a) · op(b)` for row-major buffers, where `op(a)` is `rows × inner`
/// and `op(b)` is `inner × cols`.
///
/// With `a_t` set, `a` is stored as `inner × rows` and read transposed; likewise
/// `b_t` means `b` is stored as `cols × inner`. When `accumulate` is false the
/// previous contents of `c` are overwritten.
#[allow(clippy::too_many_arguments)]
pub fn gemm(
    rows: usize,
    inner: usize,
    cols: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    c: &mut [f64],
    accumulate: bool,
) {
    assert_eq!(a.len(), rows * inner);
    assert_eq!(b.len(), inner * cols);
    assert_eq!(c.len(), rows * cols);
    if rows == 0 || cols == 0 {
        return;
    }
    let (rsa, csa) = if a_t { (1, rows) } else { (inner, 1) };
    let (rsb, csb) = if b_t { (1, inner) } else { (cols, 1) };
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: the asserted lengths bound every strided access for the given
    // extents, and `c` does not alias `a` or `b` (distinct borrows).
    unsafe {
        matrixmultiply::dgemm(
            rows,
            inner,
            cols,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            cols as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(rows: usize, inner: usize, cols: usize, a: &[f64], a_t: bool, b: &[f64], b_t: bool) -> Vec<f64> {
        let mut out = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                let mut acc = 0.0;
                for p in 0..inner {
                    let av = if a_t { a[p * rows + i] } else { a[i * inner + p] };
                    let bv = if b_t { b[j * inner + p] } else { b[p * cols + j] };
                    acc += av * bv;
                }
                out[i * cols + j] = acc;
            }
        }
        out
    }

    #[test]
    fn all_transpose_combinations_match_scalar_loops() {
        let (rows, inner, cols) = (3, 5, 4);
        let a: Vec<f64> = (0..rows * inner).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..inner * cols).map(|i| (i as f64 * 0.71).cos()).collect();
        for &a_t in &[false, true] {
            for &b_t in &[false, true] {
                let mut c = vec![0.0; rows * cols];
                gemm(rows, inner, cols, &a, a_t, &b, b_t, &mut c, false);
                let expected = naive(rows, inner, cols, &a, a_t, &b, b_t);
                for (x, y) in c.iter().zip(&expected) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn accumulate_adds_to_existing() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [1.0, 0.0, 0.0, 1.0];
        let mut c = [10.0; 4];
        gemm(2, 2, 2, &a, false, &b, false, &mut c, true);
        assert_eq!(c, [11.0, 12.0, 13.0, 14.0]);
    }
}
