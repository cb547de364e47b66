#include "polycsp/algebra.hpp"

#include <algorithm>
#include <cassert>

namespace polycsp {

namespace ops {

Operation constant(int value, int domain_size) {
    return Operation::from_function(1, domain_size, [value](const Tuple&) { return value; });
}

Operation identity(int domain_size) {
    return Operation::from_function(1, domain_size, [](const Tuple& t) { return t[0]; });
}

Operation negation() {
    return Operation::from_function(1, 2, [](const Tuple& t) { return 1 - t[0]; });
}

Operation conjunction() {
    return Operation::from_function(2, 2, [](const Tuple& t) { return t[0] & t[1]; });
}

Operation disjunction() {
    return Operation::from_function(2, 2, [](const Tuple& t) { return t[0] | t[1]; });
}

Operation exclusive_or() {
    return Operation::from_function(2, 2, [](const Tuple& t) { return t[0] ^ t[1]; });
}

Operation majority() {
    return Operation::from_function(3, 2, [](const Tuple& t) {
        return (t[0] & t[1]) | (t[0] & t[2]) | (t[1] & t[2]);
    });
}

Operation minority() {
    return Operation::from_function(3, 2, [](const Tuple& t) { return t[0] ^ t[1] ^ t[2]; });
}

Operation projection(int index, int arity, int domain_size) {
    if (index < 0 || index >= arity) throw ValidationError("projection coordinate out of range");
    return Operation::from_function(arity, domain_size, [index](const Tuple& t) { return t[index]; });
}

} // namespace ops

Operation schaefer_operation(SchaeferOp op) {
    switch (op) {
        case SchaeferOp::Const0: return ops::constant(0);
        case SchaeferOp::Const1: return ops::constant(1);
        case SchaeferOp::And: return ops::conjunction();
        case SchaeferOp::Or: return ops::disjunction();
        case SchaeferOp::Majority: return ops::majority();
        case SchaeferOp::Minority: return ops::minority();
    }
    throw ValidationError("unknown operation tag");
}

std::string to_string(SchaeferOp op) {
    switch (op) {
        case SchaeferOp::Const0: return "const0";
        case SchaeferOp::Const1: return "const1";
        case SchaeferOp::And: return "and";
        case SchaeferOp::Or: return "or";
        case SchaeferOp::Majority: return "majority";
        case SchaeferOp::Minority: return "minority";
    }
    throw ValidationError("unknown operation tag");
}

namespace {

// Visits every length-m sequence of tuples drawn from r (with repetition),
// stopping early when visit returns false. The sequence order is the
// odometer over tuple indices, least significant last.
template <typename Visit>
bool for_each_tuple_sequence(const Relation& r, int m, Visit&& visit) {
    const std::size_t n = r.size();
    if (n == 0) return true;
    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    std::vector<Tuple> chosen(static_cast<std::size_t>(m));
    while (true) {
        for (int i = 0; i < m; ++i) chosen[static_cast<std::size_t>(i)] = r.tuples()[idx[static_cast<std::size_t>(i)]];
        if (!visit(chosen)) return false;
        int pos = m - 1;
        while (pos >= 0) {
            if (++idx[static_cast<std::size_t>(pos)] < n) break;
            idx[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) return true;
    }
}

std::optional<std::vector<Tuple>> violation_on(const Operation& f, const Relation& r) {
    std::optional<std::vector<Tuple>> found;
    for_each_tuple_sequence(r, f.arity(), [&](const std::vector<Tuple>& chosen) {
        Tuple image = apply_coordinatewise(f, chosen);
        if (!r.contains(image)) {
            found = chosen;
            return false;
        }
        return true;
    });
    return found;
}

} // namespace

bool is_polymorphism(const Operation& f, const Relation& r) {
    if (f.domain_size() != r.domain_size()) throw ValidationError("domain size mismatch");
    return !violation_on(f, r).has_value();
}

bool is_polymorphism(const Operation& f, const ConstraintLanguage& lang) {
    return !polymorphism_violation(f, lang).has_value();
}

std::optional<PolymorphismWitness> polymorphism_violation(const Operation& f,
                                                          const ConstraintLanguage& lang) {
    if (f.domain_size() != lang.domain_size()) throw ValidationError("domain size mismatch");
    for (const auto& [name, rel] : lang.relations()) {
        if (auto tuples = violation_on(f, rel))
            return PolymorphismWitness{name, std::move(*tuples)};
    }
    return std::nullopt;
}

std::vector<Operation> all_operations_of_arity(int arity, int domain_size, const Budget& budget) {
    if (arity < 1) throw ValidationError("arity must be at least 1");
    if (arity > budget.enum_arity)
        throw BudgetError("operation enumeration beyond arity " + std::to_string(budget.enum_arity));
    const std::size_t inputs = checked_power(domain_size, arity);
    const std::size_t count = checked_power(domain_size, static_cast<int>(inputs));
    std::vector<Operation> out;
    out.reserve(count);
    std::vector<int> table(inputs, 0);
    while (true) {
        out.emplace_back(arity, domain_size, table);
        std::size_t pos = inputs;
        while (pos > 0) {
            if (++table[pos - 1] < domain_size) break;
            table[pos - 1] = 0;
            --pos;
        }
        if (pos == 0) break;
    }
    return out;
}

std::vector<Operation> polymorphisms_of_arity(const ConstraintLanguage& lang, int arity,
                                              const Budget& budget) {
    std::vector<Operation> out;
    for (Operation& f : all_operations_of_arity(arity, lang.domain_size(), budget))
        if (is_polymorphism(f, lang)) out.push_back(std::move(f));
    return out;
}

std::optional<EssentiallyUnaryWitness> essentially_unary_witness(const Operation& f) {
    const int d = f.domain_size();
    const int m = f.arity();
    const std::size_t inputs = checked_power(d, m);
    for (int i = 0; i < m; ++i) {
        std::vector<int> image(static_cast<std::size_t>(d), -1);
        bool depends_only_on_i = true;
        for (std::size_t r = 0; r < inputs && depends_only_on_i; ++r) {
            const Tuple t = tuple_from_rank(r, m, d);
            const int v = t[static_cast<std::size_t>(i)];
            const int out = f.table()[r];
            if (image[static_cast<std::size_t>(v)] == -1)
                image[static_cast<std::size_t>(v)] = out;
            else if (image[static_cast<std::size_t>(v)] != out)
                depends_only_on_i = false;
        }
        if (depends_only_on_i) {
            Operation inner(1, d, std::vector<int>(image.begin(), image.end()));
            return EssentiallyUnaryWitness{i, std::move(inner)};
        }
    }
    return std::nullopt;
}

bool acts_as_permutation(const Operation& f) {
    auto witness = essentially_unary_witness(f);
    if (!witness) return false;
    const std::vector<int>& table = witness->inner.table();
    std::vector<bool> hit(table.size(), false);
    for (int v : table) {
        if (hit[static_cast<std::size_t>(v)]) return false;
        hit[static_cast<std::size_t>(v)] = true;
    }
    return true;
}

Operation compose(const Operation& outer, const std::vector<Operation>& inner) {
    if (static_cast<int>(inner.size()) != outer.arity())
        throw ValidationError("composition needs one inner operation per outer argument");
    if (inner.empty()) throw ValidationError("composition needs at least one inner operation");
    const int m = inner.front().arity();
    const int d = outer.domain_size();
    for (const Operation& g : inner) {
        if (g.arity() != m) throw ValidationError("inner operations must share one arity");
        if (g.domain_size() != d) throw ValidationError("domain size mismatch in composition");
    }
    return Operation::from_function(m, d, [&](const Tuple& t) {
        Tuple mid(inner.size(), 0);
        for (std::size_t i = 0; i < inner.size(); ++i) mid[i] = inner[i].apply(t);
        return outer.apply(mid);
    });
}

std::vector<SchaeferOp> schaefer_witnesses(const ConstraintLanguage& lang) {
    std::vector<SchaeferOp> out;
    for (SchaeferOp tag : kSchaeferOps)
        if (is_polymorphism(schaefer_operation(tag), lang)) out.push_back(tag);
    return out;
}

namespace {

bool is_projection(const Operation& f) {
    auto witness = essentially_unary_witness(f);
    return witness && witness->inner == ops::identity(f.domain_size());
}

// f with arguments i and j identified (i < j): argument j is removed and fed
// a copy of argument i.
Operation identify_arguments(const Operation& f, int i, int j) {
    const int m = f.arity();
    return Operation::from_function(m - 1, f.domain_size(), [&](const Tuple& t) {
        Tuple full(static_cast<std::size_t>(m), 0);
        for (int pos = 0; pos < m; ++pos) {
            int source = pos;
            if (pos == j) source = i;
            else if (pos > j) source = pos - 1;
            full[static_cast<std::size_t>(pos)] = t[static_cast<std::size_t>(source)];
        }
        return f.apply(full);
    });
}

Operation permute_arguments(const Operation& f, const std::vector<int>& perm) {
    return Operation::from_function(f.arity(), f.domain_size(), [&](const Tuple& t) {
        Tuple rearranged(t.size(), 0);
        for (std::size_t pos = 0; pos < perm.size(); ++pos)
            rearranged[pos] = t[static_cast<std::size_t>(perm[pos])];
        return f.apply(rearranged);
    });
}

// For a ternary idempotent g whose three argument identifications are all
// projections, the identification signature determines g completely over
// {0,1}: every input repeats some argument. The signature records, per
// identified pair, whether the output follows the pair or the lone argument.
struct TernarySignature {
    bool pair12_follows_pair;
    bool pair13_follows_pair;
    bool pair23_follows_pair;
};

std::optional<TernarySignature> ternary_signature(const Operation& g) {
    auto follows = [&](int i, int j) -> std::optional<bool> {
        const Operation identified = identify_arguments(g, i, j);
        if (identified == ops::projection(i, 2)) return true; // output = identified pair
        // After removing argument j, the lone argument sits at index 1 when
        // the pair is (0,1), otherwise at index 1 = the old argument that is
        // neither i nor j.
        const int lone = (i == 0 && j == 1) ? 1 : (i == 0 ? 1 : 0);
        if (identified == ops::projection(lone, 2)) return false;
        return std::nullopt;
    };
    auto p12 = follows(0, 1);
    auto p13 = follows(0, 2);
    auto p23 = follows(1, 2);
    if (!p12 || !p13 || !p23) return std::nullopt;
    return TernarySignature{*p12, *p13, *p23};
}

// Case where the diagonal of f is constant. Identifying the argument
// positions of a witness input with two fresh variables yields a binary g
// whose diagonal entries equal the constant and whose witness entry is the
// other value; the remaining mixed entry decides between xor-like (minority)
// and the one-sided semilattice operation.
Operation generator_from_constant_diagonal(const Operation& f, int diagonal_value) {
    const int flipped = 1 - diagonal_value;
    const std::size_t inputs = checked_power(2, f.arity());
    // Some input evaluates to the non-diagonal value, else f would be constant
    // and hence essentially unary.
    for (std::size_t r = 0; r < inputs; ++r) {
        if (f.table()[r] != flipped) continue;
        Tuple complement = tuple_from_rank(r, f.arity(), 2);
        for (int& v : complement) v = 1 - v;
        const int other_mixed = f.apply(complement);
        if (other_mixed == flipped) return ops::minority(); // g is xor or xnor
        return diagonal_value == 0 ? ops::conjunction()     // x and y = g(x, g(x, y))
                                   : ops::disjunction();
    }
    throw PreconditionError("operation is constant, hence essentially unary");
}

} // namespace

Operation derive_schaefer_generator(const Operation& f) {
    if (f.domain_size() != 2) throw ValidationError("generator extraction works over {0,1}");
    if (essentially_unary_witness(f))
        throw PreconditionError("operation is essentially unary");

    // Diagonal of f.
    const int hat0 = f.apply(Tuple(static_cast<std::size_t>(f.arity()), 0));
    const int hat1 = f.apply(Tuple(static_cast<std::size_t>(f.arity()), 1));

    if (hat0 == hat1) return generator_from_constant_diagonal(f, hat0);

    // Diagonal is a unary bijection; make the operation idempotent.
    Operation g = (hat0 == 0) ? f
                              : Operation::from_function(f.arity(), 2, [&](const Tuple& t) {
                                    return 1 - f.apply(t);
                                });

    // Reduce arity by identifying argument pairs until no identification is a
    // non-projection. Pairs are scanned in lexicographic order.
    while (true) {
        if (g.arity() == 2) {
            // Idempotent binary non-projection: the two mixed inputs agree.
            const int v01 = g.apply(std::vector<int>{0, 1});
            return v01 == 0 ? ops::conjunction() : ops::disjunction();
        }
        bool descended = false;
        for (int i = 0; i < g.arity() && !descended; ++i) {
            for (int j = i + 1; j < g.arity() && !descended; ++j) {
                Operation identified = identify_arguments(g, i, j);
                if (!is_projection(identified)) {
                    g = std::move(identified);
                    descended = true;
                }
            }
        }
        if (descended) continue;

        // Every identification is a projection. Arity 4 and above would force
        // g itself to be a projection, so only the ternary case remains.
        if (g.arity() != 3)
            throw Error("internal: identification descent stalled at arity " +
                        std::to_string(g.arity()));
        auto signature = ternary_signature(g);
        if (!signature) throw Error("internal: inconsistent ternary signature");
        const int pair_count = int(signature->pair12_follows_pair) +
                               int(signature->pair13_follows_pair) +
                               int(signature->pair23_follows_pair);
        if (pair_count == 3) {
            assert(g == ops::majority());
            return ops::majority();
        }
        if (pair_count == 0) {
            assert(g == ops::minority());
            return ops::minority();
        }
        // Exactly two "follows pair" entries would make g a projection; one
        // remains. Permute arguments so the pair (0,2) follows the pair, then
        // majority(x, y, z) = g'(x, g'(x, y, z), z).
        static const std::vector<std::vector<int>> perms = {
            {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (const auto& perm : perms) {
            Operation candidate = permute_arguments(g, perm);
            auto sig = ternary_signature(candidate);
            if (sig && !sig->pair12_follows_pair && sig->pair13_follows_pair &&
                !sig->pair23_follows_pair) {
                Operation built = compose(
                    candidate, {ops::projection(0, 3), candidate, ops::projection(2, 3)});
                if (built == ops::majority()) return ops::majority();
            }
        }
        throw Error("internal: ternary case analysis failed");
    }
}

} // namespace polycsp
