#pragma once

#include "polycsp/core.hpp"

#include <memory>

namespace polycsp {

/// A formula over equality atoms (u = v), disequality atoms (u != v) and the
/// connectives and / or / not. Truth over an infinite domain depends only on
/// which variables coincide, so evaluation takes a partition of the
/// variables. Positivity (no negation, no disequality) is computed at
/// construction.
class EqFormula {
public:
    enum class Kind { Equal, NotEqual, And, Or, Not };

    static EqFormula equal(std::string left, std::string right);
    static EqFormula not_equal(std::string left, std::string right);
    static EqFormula conjunction(EqFormula left, EqFormula right);
    static EqFormula disjunction(EqFormula left, EqFormula right);
    static EqFormula negation(EqFormula inner);

    Kind kind() const noexcept { return node_->kind; }
    bool positive() const noexcept { return node_->positive; }
    /// Atom accessors; only valid for Equal / NotEqual nodes.
    const std::string& left_var() const { return node_->left_var; }
    const std::string& right_var() const { return node_->right_var; }
    /// Child accessors; left() only is valid for Not nodes.
    const EqFormula& left() const { return *node_->left; }
    const EqFormula& right() const { return *node_->right; }

    /// Sorted unique variable names.
    std::vector<std::string> variables() const;

    std::string to_string() const;

private:
    struct Node {
        Kind kind;
        bool positive;
        std::string left_var, right_var;
        std::shared_ptr<const EqFormula> left, right;
    };
    explicit EqFormula(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}
    std::shared_ptr<const Node> node_;
};

/// A partition of a finite variable set into non-empty disjoint blocks.
class Partition {
public:
    /// From explicit blocks; they must be disjoint and non-empty.
    explicit Partition(const std::vector<std::vector<std::string>>& blocks);
    /// From a block index per variable.
    static Partition from_block_ids(const std::vector<std::string>& vars,
                                    const std::vector<int>& block_ids);

    bool same_block(const std::string& u, const std::string& v) const;
    bool covers(const std::string& v) const;
    std::size_t block_count() const noexcept { return blocks_; }

private:
    std::map<std::string, int> block_of_;
    std::size_t blocks_ = 0;
};

/// A quantified equality formula. The prefix covers exactly the matrix's
/// variables.
struct PositiveQcsp {
    std::vector<std::pair<Quantifier, std::string>> prefix;
    EqFormula matrix;
};

/// Parses `A x . E y . ((x=y) | !(y!=z))` style text: quantifiers A/E bind
/// one variable each, the matrix uses =, !=, &, | and !.
PositiveQcsp parse_eq_formula(const std::string& text);

std::string serialize_eq_formula(const PositiveQcsp& formula);

/// Atom (u = v) holds iff u and v share a block; connectives are standard.
bool eval_under_partition(const EqFormula& formula, const Partition& partition);

/// The existential reduct: the matrix conjoined with (v_i != v_j) for every
/// pair i < j whose later variable is universally quantified. Requires a
/// positive matrix.
EqFormula positive_qcsp_reduce(const PositiveQcsp& formula);

/// Truth of a positive-matrix formula over an infinite domain: the reduct is
/// satisfiable iff some partition of the variables satisfies it, enumerated
/// as restricted-growth strings in lexicographic order with early exit.
bool decide_positive_qcsp(const PositiveQcsp& formula, const Budget& budget = {});

/// Independent oracle: variable i ranges over the blocks of the earlier
/// variables plus one fresh block, universals conjoin and existentials
/// disjoin. Accepts non-positive matrices as well.
bool game_oracle_eval(const PositiveQcsp& formula, const Budget& budget = {});

} // namespace polycsp
