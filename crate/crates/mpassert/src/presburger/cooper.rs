use super::linear::{lcm, LinTerm, Qff};
use super::simplify::simplify;
use super::{Budget, LogicError};

/// Eliminates `exists var. q` over the integers, returning an equivalent
/// quantifier-free formula.
///
/// Strategy: distribute the existential over disjunctions and keep
/// variable-free conjuncts outside, substitute equalities away when one is
/// available, and fall back to the classic elimination (normalise the
/// variable's coefficients, switch to a unit-coefficient variable
/// constrained by a divisibility, then cover the solution space with the
/// infinite projection plus boundary points).
pub(crate) fn eliminate_int_var(
    var: &str,
    q: Qff,
    budget: &mut Budget,
) -> Result<Qff, LogicError> {
    let q = simplify(q);
    if !q.mentions(var) {
        return Ok(q);
    }
    budget.spend(1)?;
    match q {
        Qff::Or(items) => {
            let mut parts = Vec::new();
            for item in items {
                let part = eliminate_int_var(var, item, budget)?;
                if part == Qff::Const(true) {
                    return Ok(part);
                }
                parts.push(part);
            }
            Ok(simplify(Qff::Or(parts)))
        }
        Qff::And(items) => {
            let (dependent, free): (Vec<Qff>, Vec<Qff>) =
                items.into_iter().partition(|item| item.mentions(var));
            let inner = eliminate_conjunction(var, dependent, budget)?;
            if free.is_empty() {
                Ok(inner)
            } else {
                let mut all = free;
                all.push(inner);
                Ok(simplify(Qff::And(all)))
            }
        }
        atom => eliminate_conjunction(var, vec![atom], budget),
    }
}

/// `exists var. /\ conjuncts`, all conjuncts mentioning `var`.
fn eliminate_conjunction(
    var: &str,
    conjuncts: Vec<Qff>,
    budget: &mut Budget,
) -> Result<Qff, LogicError> {
    if conjuncts.is_empty() {
        return Ok(Qff::Const(true));
    }
    // Flatten nested conjunctions left over from construction.
    if conjuncts.iter().any(|c| matches!(c, Qff::And(_))) {
        let mut flat = Vec::new();
        for c in conjuncts {
            match c {
                Qff::And(items) => flat.extend(items),
                other => flat.push(other),
            }
        }
        return eliminate_conjunction(var, flat, budget);
    }
    // An equality pins the variable down: substitute it away.
    let eq_idx = conjuncts
        .iter()
        .position(|c| matches!(c, Qff::Eq(t) if t.coeff_of(var) != 0));
    if let Some(idx) = eq_idx {
        let mut rest = conjuncts;
        let eq = match rest.remove(idx) {
            Qff::Eq(t) => t,
            _ => unreachable!(),
        };
        return substitute_equality(var, &eq, rest, budget);
    }
    // An interval-bounded variable expands by enumeration; the simplifier
    // prunes most instances, keeping the result compact. Checked before
    // distributing disjunctive conjuncts, which can multiply badly.
    const ENUM_LIMIT: i64 = 40;
    let whole = Qff::And(conjuncts);
    if let Some((lo, hi)) = constant_range(&whole, var) {
        if hi - lo <= ENUM_LIMIT {
            let mut disjuncts = Vec::new();
            for value in lo..=hi {
                budget.spend(whole.atom_count() as u64)?;
                let inst = subst_qff(&whole, var, &LinTerm::constant(value), budget)?;
                if push_disjunct(&mut disjuncts, inst) {
                    return Ok(Qff::Const(true));
                }
            }
            return Ok(simplify(Qff::Or(disjuncts)));
        }
    }
    let conjuncts = match whole {
        Qff::And(items) => items,
        other => vec![other],
    };
    // A disjunction among the conjuncts: distribute it out so each branch
    // becomes a plain conjunction (pruned by simplification as we go).
    if let Some(or_idx) = conjuncts.iter().position(|c| matches!(c, Qff::Or(_))) {
        let mut rest = conjuncts;
        let arms = match rest.remove(or_idx) {
            Qff::Or(arms) => arms,
            _ => unreachable!(),
        };
        let mut branches = Vec::new();
        for arm in arms {
            budget.spend(1)?;
            let mut branch = rest.clone();
            branch.push(arm);
            let eliminated = eliminate_int_var(var, simplify(Qff::And(branch)), budget)?;
            if eliminated == Qff::Const(true) {
                return Ok(eliminated);
            }
            if eliminated != Qff::Const(false) && !branches.contains(&eliminated) {
                branches.push(eliminated);
            }
        }
        return Ok(simplify(Qff::Or(branches)));
    }
    cooper_core(var, conjuncts, budget)
}

/// Given `c*var + r = 0`, replaces `var` in the remaining conjuncts.
/// For |c| > 1 each atom is scaled by |c| first (sound for `<`, `=` and
/// divisibility alike), and `|c| divides r` is recorded.
fn substitute_equality(
    var: &str,
    eq: &LinTerm,
    rest: Vec<Qff>,
    budget: &mut Budget,
) -> Result<Qff, LogicError> {
    let (c, r) = eq.split_var(var);
    debug_assert!(c != 0);
    let a = c.abs();
    let mut out: Vec<Qff> = Vec::new();
    for atom in rest {
        out.push(subst_scaled(&atom, var, c, &r, budget)?);
    }
    if a > 1 {
        out.push(Qff::Div(a, r.clone()));
    }
    Ok(simplify(Qff::And(out)))
}

/// Substitutes under `c*var = -r`: the atom is scaled by `|c|`, after which
/// its `var` coefficient is divisible by `c` and the equality applies.
fn subst_scaled(
    q: &Qff,
    var: &str,
    c: i64,
    r: &LinTerm,
    budget: &mut Budget,
) -> Result<Qff, LogicError> {
    let a = c.abs();
    let image = |t: &LinTerm| -> Result<LinTerm, LogicError> {
        let (b, rest) = t.split_var(var);
        if b == 0 {
            return Ok(t.clone());
        }
        // a * t = a*b*var + a*rest; a*b*var = (a*b/c) * (c*var) = (a*b/c) * (-r)
        let scaled_rest = rest.scale(a)?;
        let factor = -(a * b) / c;
        scaled_rest.add(&r.scale(factor)?)
    };
    Ok(match q {
        Qff::Const(_) => q.clone(),
        Qff::Lt(t) => {
            budget.spend(1)?;
            Qff::Lt(image(t)?)
        }
        Qff::Eq(t) => {
            budget.spend(1)?;
            Qff::Eq(image(t)?)
        }
        Qff::Div(k, t) => {
            budget.spend(1)?;
            let k2 = if t.coeff_of(var) != 0 { k.checked_mul(a).ok_or(LogicError::Overflow)? } else { *k };
            Qff::Div(k2, image(t)?)
        }
        Qff::NotDiv(k, t) => {
            budget.spend(1)?;
            let k2 = if t.coeff_of(var) != 0 { k.checked_mul(a).ok_or(LogicError::Overflow)? } else { *k };
            Qff::NotDiv(k2, image(t)?)
        }
        Qff::And(items) => Qff::And(
            items.iter().map(|i| subst_scaled(i, var, c, r, budget)).collect::<Result<_, _>>()?,
        ),
        Qff::Or(items) => Qff::Or(
            items.iter().map(|i| subst_scaled(i, var, c, r, budget)).collect::<Result<_, _>>()?,
        ),
    })
}

/// The boundary-point expansion, on a pure conjunction of `<`, `|` and
/// negated `|` atoms (equalities expanded beforehand).
fn cooper_core(var: &str, conjuncts: Vec<Qff>, budget: &mut Budget) -> Result<Qff, LogicError> {
    let body = simplify(Qff::And(
        conjuncts.into_iter().map(expand_equalities).collect(),
    ));
    if !body.mentions(var) {
        return Ok(body);
    }
    if matches!(body, Qff::Or(_)) {
        // Equality expansion may reintroduce disjunction.
        return eliminate_int_var(var, body, budget);
    }

    // Step 1: common coefficient magnitude.
    let mut m = 1i64;
    collect_coeff_lcm(&body, var, &mut m)?;
    let scaled = scale_var_to(&body, var, m, budget)?;
    // From here `var` occurs with coefficient +-1 and ranges over multiples
    // of m, recorded as a divisibility constraint.
    let body = if m > 1 {
        Qff::And(vec![scaled, Qff::Div(m, LinTerm::var(var))])
    } else {
        scaled
    };

    // Step 2: bounds and the divisibility period.
    let mut lowers: Vec<LinTerm> = Vec::new();
    let mut uppers: Vec<LinTerm> = Vec::new();
    let mut delta = 1i64;
    collect_bounds(&body, var, &mut lowers, &mut uppers, &mut delta)?;
    dedup_terms(&mut lowers);
    dedup_terms(&mut uppers);

    // Step 3: expansion over the smaller side.
    let use_lower = lowers.len() <= uppers.len();
    let boundary = if use_lower { &lowers } else { &uppers };
    let mut disjuncts: Vec<Qff> = Vec::new();
    for j in 1..=delta {
        budget.spend(body.atom_count() as u64)?;
        let inf = infinite_projection(&body, var, j, use_lower, budget)?;
        if push_disjunct(&mut disjuncts, inf) {
            return Ok(Qff::Const(true));
        }
        for b in boundary {
            // u := b + j (lower side) or u := b - j (upper side).
            let offset = if use_lower { j } else { -j };
            let witness = b.add(&LinTerm::constant(offset))?;
            budget.spend(body.atom_count() as u64)?;
            let inst = subst_qff(&body, var, &witness, budget)?;
            if push_disjunct(&mut disjuncts, inst) {
                return Ok(Qff::Const(true));
            }
        }
    }
    Ok(simplify(Qff::Or(disjuncts)))
}

/// Decides `exists vars. q` by depth-first search over Cooper's candidate
/// substitutions, without materialising the eliminated formula. Used for
/// satisfiability queries, where early `true` exits and per-branch constant
/// folding beat the symbolic expansion by a wide margin.
pub(crate) fn sat_search(q: Qff, vars: &[String], budget: &mut Budget) -> Result<bool, LogicError> {
    let q = simplify(q);
    if let Qff::Const(b) = q {
        return Ok(b);
    }
    budget.spend(1)?;

    // Equality fast path: a pinned variable is substituted away directly.
    if let Qff::And(items) = &q {
        let eq = items.iter().enumerate().find_map(|(i, c)| match c {
            Qff::Eq(t) => {
                // Prefer the cheapest pinned variable of this equality.
                vars.iter()
                    .filter(|v| t.coeff_of(v) != 0)
                    .min_by_key(|v| t.coeff_of(v).abs())
                    .map(|v| (i, v.clone()))
            }
            _ => None,
        });
        if let Some((idx, eq_var)) = eq {
            let mut rest = items.clone();
            let eq = match rest.remove(idx) {
                Qff::Eq(t) => t,
                _ => unreachable!(),
            };
            let substituted = substitute_equality(&eq_var, &eq, rest, budget)?;
            let rest_vars: Vec<String> =
                vars.iter().filter(|v| **v != eq_var).cloned().collect();
            return sat_search(substituted, &rest_vars, budget);
        }
    }
    // A variable pinned into a small interval by single-variable bound
    // conjuncts is cheaper to enumerate than to eliminate: constants ground
    // the other atoms and fold fast. This fires before disjunction
    // splitting so bounded variables ground whole disjunctive subtrees.
    const ENUM_LIMIT: i64 = 40;
    let occurring: Vec<&String> = vars.iter().filter(|v| q.mentions(v)).collect();
    let intervals = propagate_intervals(&q);
    let mut best_range: Option<(String, i64, i64)> = None;
    for v in &occurring {
        if let Some((lo, hi)) = intervals
            .iter()
            .find(|(name, ..)| &name == v)
            .and_then(|(_, lo, hi)| Some(((*lo)?, (*hi)?)))
        {
            let width = hi - lo;
            if width <= ENUM_LIMIT
                && best_range.as_ref().is_none_or(|(_, blo, bhi)| width < bhi - blo)
            {
                best_range = Some(((*v).clone(), lo, hi));
            }
        }
    }
    if let Some((var, lo, hi)) = best_range {
        let remaining: Vec<String> = vars.iter().filter(|v| **v != var).cloned().collect();
        for value in lo..=hi {
            budget.spend(q.atom_count() as u64)?;
            let inst = subst_qff(&q, &var, &LinTerm::constant(value), budget)?;
            if sat_search(inst, &remaining, budget)? {
                return Ok(true);
            }
        }
        return Ok(false);
    }

    // The existential prefix distributes over disjunction, including
    // disjunctive conjuncts: each arm becomes a small conjunction.
    match q {
        Qff::Or(items) => {
            for item in items {
                if sat_search(item, vars, budget)? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        Qff::And(ref items) => {
            // Branch on the smallest disjunctive conjunct.
            let or_idx = items
                .iter()
                .enumerate()
                .filter_map(|(i, c)| match c {
                    Qff::Or(arms) => Some((i, arms.len())),
                    _ => None,
                })
                .min_by_key(|(_, n)| *n)
                .map(|(i, _)| i);
            if let Some(or_idx) = or_idx {
                let mut rest = items.clone();
                let arms = match rest.remove(or_idx) {
                    Qff::Or(arms) => arms,
                    _ => unreachable!(),
                };
                for arm in arms {
                    budget.spend(1)?;
                    let mut branch = rest.clone();
                    branch.push(arm);
                    if sat_search(Qff::And(branch), vars, budget)? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
        }
        _ => {}
    }

    // Plain conjunction of atoms: pick the cheapest occurring variable.
    let var = occurring
        .iter()
        .min_by_key(|v| {
            let mut m = 1i64;
            let _ = collect_coeff_lcm(&q, v, &mut m);
            m
        })
        .map(|v| (*v).clone())
        .unwrap_or_else(|| unreachable!("no candidate variable for a non-ground formula"));
    let remaining: Vec<String> = vars.iter().filter(|v| **v != var).cloned().collect();

    let body = expand_equalities(q);
    let mut m = 1i64;
    collect_coeff_lcm(&body, &var, &mut m)?;
    let scaled = scale_var_to(&body, &var, m, budget)?;
    let body = if m > 1 {
        Qff::And(vec![scaled, Qff::Div(m, LinTerm::var(&var))])
    } else {
        scaled
    };
    let mut lowers: Vec<LinTerm> = Vec::new();
    let mut uppers: Vec<LinTerm> = Vec::new();
    let mut delta = 1i64;
    collect_bounds(&body, &var, &mut lowers, &mut uppers, &mut delta)?;
    dedup_terms(&mut lowers);
    dedup_terms(&mut uppers);
    let use_lower = lowers.len() <= uppers.len();
    let boundary = if use_lower { &lowers } else { &uppers };

    for j in 1..=delta {
        budget.spend(body.atom_count() as u64)?;
        let inf = infinite_projection(&body, &var, j, use_lower, budget)?;
        if sat_search(inf, &remaining, budget)? {
            return Ok(true);
        }
        for b in boundary {
            let offset = if use_lower { j } else { -j };
            let witness = b.add(&LinTerm::constant(offset))?;
            budget.spend(body.atom_count() as u64)?;
            let inst = subst_qff(&body, &var, &witness, budget)?;
            if sat_search(inst, &remaining, budget)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Per-variable intervals implied by the inequality atoms of a conjunction,
/// derived by a few rounds of interval propagation: for each atom
/// `sum c_i*v_i + k < 0` and target variable `v`, the extremal values of the
/// remaining terms bound `c*v` from above. Sound by construction (every
/// model satisfies the derived bounds), so enumerating a derived interval
/// decides the existential exactly.
fn propagate_intervals(q: &Qff) -> Vec<(String, Option<i64>, Option<i64>)> {
    const CAP: i64 = 1 << 40;
    let atoms: Vec<&Qff> = match q {
        Qff::And(items) => items.iter().collect(),
        atom => vec![atom],
    };
    let mut intervals: Vec<(String, Option<i64>, Option<i64>)> = Vec::new();
    for atom in &atoms {
        if let Qff::Lt(t) | Qff::Eq(t) = atom {
            for v in t.vars() {
                if !intervals.iter().any(|(name, ..)| name == v) {
                    intervals.push((v.clone(), None, None));
                }
            }
        }
    }
    for _round in 0..4 {
        let mut changed = false;
        for atom in &atoms {
            // `t < 0` gives sum <= -k-1; `t = 0` gives both directions.
            let bounds: &[(&LinTerm, i64)] = match atom {
                Qff::Lt(t) => &[(t, -1)],
                Qff::Eq(t) => &[(t, 0)],
                _ => continue,
            };
            let eq = matches!(atom, Qff::Eq(_));
            for (t, slack) in bounds {
                for dir in [false, true] {
                    // dir=false: sum(t) <= -k+slack; dir=true (equalities
                    // only): sum(-t) <= k.
                    if dir && !eq {
                        continue;
                    }
                    let (terms, rhs) = if dir {
                        (t.scale(-1).ok(), t.constant)
                    } else {
                        (Some((*t).clone()), -t.constant + slack)
                    };
                    let Some(terms) = terms else { continue };
                    for (v, c) in terms.coeffs.clone() {
                        // c*v <= rhs - sum_{w != v} c_w*w (minimised).
                        let mut budget_rhs: Option<i64> = Some(rhs);
                        for (w, cw) in &terms.coeffs {
                            if *w == v {
                                continue;
                            }
                            let (lo, hi) = intervals
                                .iter()
                                .find(|(name, ..)| name == w)
                                .map(|(_, lo, hi)| (*lo, *hi))
                                .unwrap_or((None, None));
                            let contrib = if *cw > 0 { lo.map(|b| cw * b) } else { hi.map(|b| cw * b) };
                            budget_rhs = match (budget_rhs, contrib) {
                                (Some(r), Some(min_term)) => r.checked_sub(min_term),
                                _ => None,
                            };
                        }
                        let Some(m) = budget_rhs else { continue };
                        if m.abs() > CAP {
                            continue;
                        }
                        let entry = intervals.iter_mut().find(|(name, ..)| name == &v).unwrap();
                        if c > 0 {
                            // v <= floor(m / c)
                            let b = m.div_euclid(c);
                            if entry.2.is_none_or(|old| b < old) {
                                entry.2 = Some(b);
                                changed = true;
                            }
                        } else {
                            // v >= ceil(m / c) with c < 0; ceil(-a/b) = -floor(a/b)
                            let b = -(m.div_euclid(-c));
                            if entry.1.is_none_or(|old| b > old) {
                                entry.1 = Some(b);
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    intervals
}

/// Finite interval `[lo, hi]` for `var` implied by the conjunction, if any.
fn constant_range(q: &Qff, var: &str) -> Option<(i64, i64)> {
    propagate_intervals(q)
        .into_iter()
        .find(|(name, ..)| name == var)
        .and_then(|(_, lo, hi)| Some((lo?, hi?)))
}

/// `t = 0` as a pair of strict inequalities.
fn expand_equalities(q: Qff) -> Qff {
    match q {
        Qff::Eq(t) => {
            let neg = t.scale(-1).expect("negating a term cannot overflow coefficients");
            Qff::And(vec![
                Qff::Lt(t.add(&LinTerm::constant(-1)).expect("offset cannot overflow")),
                Qff::Lt(neg.add(&LinTerm::constant(-1)).expect("offset cannot overflow")),
            ])
        }
        Qff::And(items) => Qff::And(items.into_iter().map(expand_equalities).collect()),
        Qff::Or(items) => Qff::Or(items.into_iter().map(expand_equalities).collect()),
        other => other,
    }
}

/// Returns true when the disjunct is the constant `true` (the whole
/// disjunction short-circuits).
fn push_disjunct(disjuncts: &mut Vec<Qff>, q: Qff) -> bool {
    let q = simplify(q);
    if q == Qff::Const(true) {
        return true;
    }
    if q != Qff::Const(false) && !disjuncts.contains(&q) {
        disjuncts.push(q);
    }
    false
}

fn collect_coeff_lcm(q: &Qff, var: &str, m: &mut i64) -> Result<(), LogicError> {
    match q {
        Qff::Const(_) => Ok(()),
        Qff::Lt(t) | Qff::Eq(t) | Qff::Div(_, t) | Qff::NotDiv(_, t) => {
            let c = t.coeff_of(var);
            if c != 0 {
                *m = lcm(*m, c.abs())?;
            }
            Ok(())
        }
        Qff::And(items) | Qff::Or(items) => {
            for item in items {
                collect_coeff_lcm(item, var, m)?;
            }
            Ok(())
        }
    }
}

/// Rescales every atom so the variable's coefficient becomes +-m, then
/// renames `m*var` to `var` (coefficient +-1).
fn scale_var_to(q: &Qff, var: &str, m: i64, budget: &mut Budget) -> Result<Qff, LogicError> {
    Ok(match q {
        Qff::Const(_) => q.clone(),
        Qff::Eq(_) => unreachable!("equalities are expanded before scaling"),
        Qff::Lt(t) => {
            let (c, rest) = t.split_var(var);
            if c == 0 {
                q.clone()
            } else {
                budget.spend(1)?;
                let factor = m / c.abs();
                let mut scaled = rest.scale(factor)?;
                scaled.coeffs.insert(var.to_string(), c.signum());
                Qff::Lt(scaled)
            }
        }
        Qff::Div(k, t) | Qff::NotDiv(k, t) => {
            let (c, rest) = t.split_var(var);
            let negated = matches!(q, Qff::NotDiv(..));
            if c == 0 {
                q.clone()
            } else {
                budget.spend(1)?;
                let factor = m / c.abs();
                let mut scaled = rest.scale(factor)?;
                scaled.coeffs.insert(var.to_string(), c.signum());
                let k2 = k.checked_mul(factor).ok_or(LogicError::Overflow)?;
                if negated {
                    Qff::NotDiv(k2, scaled)
                } else {
                    Qff::Div(k2, scaled)
                }
            }
        }
        Qff::And(items) => Qff::And(
            items.iter().map(|i| scale_var_to(i, var, m, budget)).collect::<Result<_, _>>()?,
        ),
        Qff::Or(items) => Qff::Or(
            items.iter().map(|i| scale_var_to(i, var, m, budget)).collect::<Result<_, _>>()?,
        ),
    })
}

/// Collects boundary terms: `rest < u` contributes `rest` to the lower
/// bounds, `u < -rest` contributes `-rest` to the upper bounds. Divisor
/// moduli accumulate into the period.
fn collect_bounds(
    q: &Qff,
    var: &str,
    lowers: &mut Vec<LinTerm>,
    uppers: &mut Vec<LinTerm>,
    delta: &mut i64,
) -> Result<(), LogicError> {
    match q {
        Qff::Const(_) => Ok(()),
        Qff::Eq(_) => unreachable!("equalities are expanded before bound collection"),
        Qff::Lt(t) => {
            let (c, rest) = t.split_var(var);
            match c {
                0 => {}
                1 => uppers.push(rest.scale(-1)?), // u + rest < 0  <=>  u < -rest
                -1 => lowers.push(rest),           // -u + rest < 0 <=>  rest < u
                _ => unreachable!("coefficients are +-1 after scaling"),
            }
            Ok(())
        }
        Qff::Div(k, t) | Qff::NotDiv(k, t) => {
            if t.coeff_of(var) != 0 {
                *delta = lcm(*delta, *k)?;
            }
            Ok(())
        }
        Qff::And(items) | Qff::Or(items) => {
            for item in items {
                collect_bounds(item, var, lowers, uppers, delta)?;
            }
            Ok(())
        }
    }
}

fn dedup_terms(terms: &mut Vec<LinTerm>) {
    let mut seen: Vec<LinTerm> = Vec::new();
    terms.retain(|t| {
        if seen.contains(t) {
            false
        } else {
            seen.push(t.clone());
            true
        }
    });
}

/// The projection at infinity: inequality atoms involving the variable are
/// decided by the direction of travel, divisibility atoms keep only the
/// residue `j`.
fn infinite_projection(
    q: &Qff,
    var: &str,
    j: i64,
    towards_minus_inf: bool,
    budget: &mut Budget,
) -> Result<Qff, LogicError> {
    Ok(match q {
        Qff::Const(_) => q.clone(),
        Qff::Eq(_) => unreachable!("equalities are expanded before projection"),
        Qff::Lt(t) => {
            let (c, _) = t.split_var(var);
            match c {
                0 => q.clone(),
                // u + rest < 0: true at -inf, false at +inf.
                1 => Qff::Const(towards_minus_inf),
                // rest < u: false at -inf, true at +inf.
                -1 => Qff::Const(!towards_minus_inf),
                _ => unreachable!(),
            }
        }
        Qff::Div(..) | Qff::NotDiv(..) => subst_qff(q, var, &LinTerm::constant(j), budget)?,
        Qff::And(items) => Qff::And(
            items
                .iter()
                .map(|i| infinite_projection(i, var, j, towards_minus_inf, budget))
                .collect::<Result<_, _>>()?,
        ),
        Qff::Or(items) => Qff::Or(
            items
                .iter()
                .map(|i| infinite_projection(i, var, j, towards_minus_inf, budget))
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn subst_qff(
    q: &Qff,
    var: &str,
    replacement: &LinTerm,
    budget: &mut Budget,
) -> Result<Qff, LogicError> {
    Ok(match q {
        Qff::Const(_) => q.clone(),
        Qff::Lt(t) => {
            budget.spend(1)?;
            Qff::Lt(t.subst_var(var, replacement)?)
        }
        Qff::Eq(t) => {
            budget.spend(1)?;
            Qff::Eq(t.subst_var(var, replacement)?)
        }
        Qff::Div(k, t) => {
            budget.spend(1)?;
            Qff::Div(*k, t.subst_var(var, replacement)?)
        }
        Qff::NotDiv(k, t) => {
            budget.spend(1)?;
            Qff::NotDiv(*k, t.subst_var(var, replacement)?)
        }
        Qff::And(items) => Qff::And(
            items.iter().map(|i| subst_qff(i, var, replacement, budget)).collect::<Result<_, _>>()?,
        ),
        Qff::Or(items) => Qff::Or(
            items.iter().map(|i| subst_qff(i, var, replacement, budget)).collect::<Result<_, _>>()?,
        ),
    })
}
