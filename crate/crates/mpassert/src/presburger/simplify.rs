use super::linear::{gcd, LinTerm, Qff};

/// Light normalisation after each elimination step: constant folding,
/// boolean unit absorption, duplicate-atom removal and modulus reduction.
/// Keeps intermediate formulas small enough for desk-scale inputs.
pub(crate) fn simplify(q: Qff) -> Qff {
    match q {
        Qff::Const(_) => q,
        Qff::Lt(t) => {
            if t.is_constant() {
                Qff::Const(t.constant < 0)
            } else {
                Qff::Lt(reduce_lt(t))
            }
        }
        Qff::Eq(t) => {
            if t.is_constant() {
                Qff::Const(t.constant == 0)
            } else {
                reduce_eq(t)
            }
        }
        Qff::Div(k, t) => simplify_div(k, t, false),
        Qff::NotDiv(k, t) => simplify_div(k, t, true),
        Qff::And(items) => {
            let mut out: Vec<Qff> = Vec::new();
            for item in items {
                match simplify(item) {
                    Qff::Const(true) => {}
                    Qff::Const(false) => return Qff::Const(false),
                    Qff::And(nested) => {
                        for n in nested {
                            if !out.contains(&n) {
                                out.push(n);
                            }
                        }
                    }
                    other => {
                        if !out.contains(&other) {
                            out.push(other);
                        }
                    }
                }
            }
            match out.len() {
                0 => Qff::Const(true),
                1 => out.pop().unwrap(),
                _ => Qff::And(out),
            }
        }
        Qff::Or(items) => {
            let mut out: Vec<Qff> = Vec::new();
            for item in items {
                match simplify(item) {
                    Qff::Const(false) => {}
                    Qff::Const(true) => return Qff::Const(true),
                    Qff::Or(nested) => {
                        for n in nested {
                            if !out.contains(&n) {
                                out.push(n);
                            }
                        }
                    }
                    other => {
                        if !out.contains(&other) {
                            out.push(other);
                        }
                    }
                }
            }
            match out.len() {
                0 => Qff::Const(false),
                1 => out.pop().unwrap(),
                _ => Qff::Or(out),
            }
        }
    }
}

/// Divides a strict inequality through by the gcd of its coefficients:
/// `g*t' + c < 0` iff `t' + floor(c/g) ... ` — precisely, `g*t' < -c` iff
/// `t' < ceil(-c/g)` iff `t' - ceil(-c/g) + 1 <= 0`.
fn reduce_lt(t: LinTerm) -> LinTerm {
    let g = t.coeffs.values().fold(0i64, |acc, c| gcd(acc, *c));
    if g <= 1 {
        return t;
    }
    let mut out = LinTerm::constant(0);
    for (v, c) in &t.coeffs {
        out.coeffs.insert(v.clone(), c / g);
    }
    // g*s + c < 0  <=>  s < -c/g  <=>  s <= ceil(-c/g) - 1  <=>  s - ceil(-c/g) + 1 <= 0
    // <=>  s - ceil(-c/g) < 0 ... using ceil(-c/g) = -(-(-c)).div_euclid ...
    let neg_c = -t.constant;
    let ceil = neg_c.div_euclid(g) + if neg_c.rem_euclid(g) != 0 { 1 } else { 0 };
    out.constant = -ceil;
    out
}

/// `g*s + c = 0` is unsatisfiable unless g divides c, else divide through.
fn reduce_eq(t: LinTerm) -> Qff {
    let g = t.coeffs.values().fold(0i64, |acc, c| gcd(acc, *c));
    if g <= 1 {
        return Qff::Eq(t);
    }
    if t.constant % g != 0 {
        return Qff::Const(false);
    }
    let mut out = LinTerm::constant(t.constant / g);
    for (v, c) in &t.coeffs {
        out.coeffs.insert(v.clone(), c / g);
    }
    Qff::Eq(out)
}

fn simplify_div(k: i64, t: LinTerm, negated: bool) -> Qff {
    if k == 1 {
        return Qff::Const(!negated);
    }
    if t.is_constant() {
        let divides = t.constant.rem_euclid(k) == 0;
        return Qff::Const(divides != negated);
    }
    // k | t depends only on t mod k; reduce coefficients and pull out the
    // shared factor of k and the term.
    let mut reduced = LinTerm::constant(t.constant.rem_euclid(k));
    for (v, c) in &t.coeffs {
        let r = c.rem_euclid(k);
        if r != 0 {
            reduced.coeffs.insert(v.clone(), r);
        }
    }
    if reduced.is_constant() {
        let divides = reduced.constant.rem_euclid(k) == 0;
        return Qff::Const(divides != negated);
    }
    let shared = reduced.coeffs.values().fold(k, |acc, c| gcd(acc, *c));
    let (k, reduced) = if shared > 1 && reduced.constant % shared == 0 {
        let mut small = LinTerm::constant(reduced.constant / shared);
        for (v, c) in &reduced.coeffs {
            small.coeffs.insert(v.clone(), c / shared);
        }
        (k / shared, small)
    } else {
        (k, reduced)
    };
    if k == 1 {
        return Qff::Const(!negated);
    }
    if negated {
        Qff::NotDiv(k, reduced)
    } else {
        Qff::Div(k, reduced)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(pairs: &[(&str, i64)], k: i64) -> LinTerm {
        let mut t = LinTerm::constant(k);
        for (v, c) in pairs {
            t.coeffs.insert((*v).to_string(), *c);
        }
        t
    }

    #[test]
    fn folds_ground_atoms() {
        assert_eq!(simplify(Qff::Lt(term(&[], -3))), Qff::Const(true));
        assert_eq!(simplify(Qff::Div(3, term(&[], 9))), Qff::Const(true));
        assert_eq!(simplify(Qff::NotDiv(3, term(&[], 9))), Qff::Const(false));
    }

    #[test]
    fn absorbs_units_and_duplicates() {
        let atom = Qff::Lt(term(&[("x", 1)], 0));
        let conj = Qff::And(vec![Qff::Const(true), atom.clone(), atom.clone()]);
        assert_eq!(simplify(conj), atom);
        let disj = Qff::Or(vec![Qff::Const(false), atom.clone(), Qff::Const(true)]);
        assert_eq!(simplify(disj), Qff::Const(true));
    }

    #[test]
    fn reduces_moduli() {
        // 4 | 2x + 6  <=>  2 | x + 3
        let out = simplify(Qff::Div(4, term(&[("x", 2)], 6)));
        assert_eq!(out, Qff::Div(2, term(&[("x", 1)], 1)));
        // 3 | 3x  <=>  true
        assert_eq!(simplify(Qff::Div(3, term(&[("x", 3)], 0))), Qff::Const(true));
    }

    #[test]
    fn reduces_inequality_gcd() {
        // 2x - 5 < 0  <=>  x < 2.5  <=>  x <= 2  <=>  x - 3 < 0
        let out = simplify(Qff::Lt(term(&[("x", 2)], -5)));
        assert_eq!(out, Qff::Lt(term(&[("x", 1)], -3)));
    }
}
