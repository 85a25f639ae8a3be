//! Shape bookkeeping: strides, broadcasting, and multi-index walking.

pub type Shape = Vec<usize>;

pub fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Row-major strides for a shape.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![0; shape.len()];
    let mut acc = 1;
    for i in (0..shape.len()).rev() {
        s[i] = acc;
        acc *= shape[i];
    }
    s
}

/// NumPy-style broadcast of two shapes; None when incompatible.
pub fn broadcast_shape(a: &[usize], b: &[usize]) -> Option<Shape> {
    let rank = a.len().max(b.len());
    let mut out = vec![0; rank];
    for i in 0..rank {
        let da = if i < rank - a.len() { 1 } else { a[i - (rank - a.len())] };
        let db = if i < rank - b.len() { 1 } else { b[i - (rank - b.len())] };
        if da == db {
            out[i] = da;
        } else if da == 1 {
            out[i] = db;
        } else if db == 1 {
            out[i] = da;
        } else {
            return None;
        }
    }
    Some(out)
}

/// Strides of an operand viewed through a broadcast output shape: 0 on axes
/// the operand repeats along, its own stride elsewhere.
pub fn broadcast_strides(shape: &[usize], out_shape: &[usize]) -> Vec<usize> {
    let own = strides(shape);
    let offset = out_shape.len() - shape.len();
    let mut s = vec![0; out_shape.len()];
    for i in 0..out_shape.len() {
        if i >= offset && shape[i - offset] != 1 {
            s[i] = own[i - offset];
        }
    }
    s
}

/// Walks every output index of a broadcast binary op, yielding the linear
/// offsets (out, a, b). Uses an odometer over the output shape so the walk is
/// a single pass regardless of rank.
pub fn broadcast_walk(
    out_shape: &[usize],
    a_shape: &[usize],
    b_shape: &[usize],
    mut visit: impl FnMut(usize, usize, usize),
) {
    let n = numel(out_shape);
    if n == 0 {
        return;
    }
    let rank = out_shape.len();
    if rank == 0 {
        visit(0, 0, 0);
        return;
    }
    let sa = broadcast_strides(a_shape, out_shape);
    let sb = broadcast_strides(b_shape, out_shape);
    let mut idx = vec![0usize; rank];
    let (mut ia, mut ib) = (0usize, 0usize);
    for o in 0..n {
        visit(o, ia, ib);
        for ax in (0..rank).rev() {
            idx[ax] += 1;
            ia += sa[ax];
            ib += sb[ax];
            if idx[ax] < out_shape[ax] {
                break;
            }
            idx[ax] = 0;
            ia -= sa[ax] * out_shape[ax];
            ib -= sb[ax] * out_shape[ax];
        }
    }
}

pub fn fmt_shape(shape: &[usize]) -> String {
    let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    format!("[{}]", dims.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadcast_rules() {
        assert_eq!(broadcast_shape(&[3, 1], &[1, 4]), Some(vec![3, 4]));
        assert_eq!(broadcast_shape(&[2, 3], &[3]), Some(vec![2, 3]));
        assert_eq!(broadcast_shape(&[2, 3], &[]), Some(vec![2, 3]));
        assert_eq!(broadcast_shape(&[2, 3], &[2, 4]), None);
    }

    #[test]
    fn walk_matches_manual_indexing() {
        // (2,3) + (3,) suffix broadcast
        let out = vec![2, 3];
        let mut seen = Vec::new();
        broadcast_walk(&out, &[2, 3], &[3], |o, a, b| seen.push((o, a, b)));
        assert_eq!(
            seen,
            vec![(0, 0, 0), (1, 1, 1), (2, 2, 2), (3, 3, 0), (4, 4, 1), (5, 5, 2)]
        );
    }

    #[test]
    fn walk_middle_axis() {
        // (2,2,2) with b broadcast over middle: b shape (2,1,2)
        let mut seen = Vec::new();
        broadcast_walk(&[2, 2, 2], &[2, 2, 2], &[2, 1, 2], |o, a, b| seen.push((o, a, b)));
        let expect = vec![
            (0, 0, 0),
            (1, 1, 1),
            (2, 2, 0),
            (3, 3, 1),
            (4, 4, 2),
            (5, 5, 3),
            (6, 6, 2),
            (7, 7, 3),
        ];
        assert_eq!(seen, expect);
    }
}
