#include "polycsp/oracle.hpp"

#include "polycsp/algebra.hpp"

#include <algorithm>

namespace polycsp {

namespace {

void check_var_budget(std::size_t n, const Budget& budget) {
    if (n > static_cast<std::size_t>(budget.brute_vars))
        throw BudgetError("exhaustive search limited to " + std::to_string(budget.brute_vars) +
                          " variables, got " + std::to_string(n));
}

} // namespace

std::optional<Assignment> brute_solve(const CspInstance& inst, const Budget& budget) {
    const auto& vars = inst.variables();
    check_var_budget(vars.size(), budget);
    const int d = inst.language().domain_size();
    const std::size_t total = checked_power(d, static_cast<int>(vars.size()));
    for (std::size_t r = 0; r < total; ++r) {
        const Tuple values = tuple_from_rank(r, static_cast<int>(vars.size()), d);
        Assignment a;
        for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = values[i];
        if (satisfies_all(inst, a)) return a;
    }
    return std::nullopt;
}

namespace {

bool eval_prefix(const QcspInstance& inst, std::size_t depth, Assignment& a) {
    const auto& prefix = inst.prefix();
    if (depth == prefix.size()) return satisfies_all(inst.base(), a);
    const auto& [q, var] = prefix[depth];
    const int d = inst.base().language().domain_size();
    for (int v = 0; v < d; ++v) {
        a[var] = v;
        const bool sub = eval_prefix(inst, depth + 1, a);
        if (q == Quantifier::Forall && !sub) {
            a.erase(var);
            return false;
        }
        if (q == Quantifier::Exists && sub) {
            a.erase(var);
            return true;
        }
    }
    a.erase(var);
    return q == Quantifier::Forall;
}

} // namespace

bool brute_eval_qcsp(const QcspInstance& inst, const Budget& budget) {
    check_var_budget(inst.base().variables().size(), budget);
    Assignment a;
    return eval_prefix(inst, 0, a);
}

bool is_partial_solution(const CspInstance& inst, const PartialAssignment& p) {
    for (const Constraint& c : inst.constraints()) {
        const Relation& r = inst.language().relation(c.relation);
        bool witnessed = false;
        for (const Tuple& t : r.tuples()) {
            bool agrees = true;
            for (std::size_t i = 0; i < c.vars.size() && agrees; ++i) {
                auto it = p.find(c.vars[i]);
                if (it != p.end() && it->second != t[i]) agrees = false;
            }
            if (agrees) {
                witnessed = true;
                break;
            }
        }
        if (!witnessed) return false;
    }
    return true;
}

Relation pp_closure(const Relation& r, const ConstraintLanguage& lang, const Budget& budget) {
    if (r.domain_size() != lang.domain_size()) throw ValidationError("domain size mismatch");
    const int m = static_cast<int>(r.size());
    if (m == 0) return Relation::empty(r.name(), r.arity(), r.domain_size());
    if (m > budget.enum_arity)
        throw BudgetError("closure of a relation with " + std::to_string(m) +
                          " tuples exceeds the enumeration budget of " +
                          std::to_string(budget.enum_arity));

    // Columns of the stored tuple list: column j is the m-tuple of the j-th
    // coordinates.
    const int k = r.arity();
    std::vector<Tuple> columns(static_cast<std::size_t>(k), Tuple(static_cast<std::size_t>(m), 0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j)
            columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
                r.tuples()[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

    std::vector<Tuple> images;
    for (const Operation& f : polymorphisms_of_arity(lang, m, budget)) {
        Tuple image(static_cast<std::size_t>(k), 0);
        for (int j = 0; j < k; ++j) image[static_cast<std::size_t>(j)] = f.apply(columns[static_cast<std::size_t>(j)]);
        images.push_back(std::move(image));
    }
    return Relation(r.name(), k, r.domain_size(), std::move(images));
}

} // namespace polycsp
