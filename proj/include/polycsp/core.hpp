#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polycsp {

/// Domain values are plain integers in {0..d-1}; boolean false is 0, true is 1.
using Tuple = std::vector<int>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries a 1-based line number when one is known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message, int line = 0);
    int line() const noexcept { return line_; }

private:
    int line_ = 0;
};

/// A structural invariant of the domain model was violated.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An exhaustive procedure was asked to exceed its configured limit.
/// Budgets are hard errors, never silent truncation.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// A caller invoked an algorithm whose entry condition does not hold
/// (for example a solver whose qualifying polymorphism is absent).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Limits for the exhaustive procedures.
struct Budget {
    int enum_arity = 4;      ///< largest operation arity enumerated (d^(d^m) tables)
    int brute_vars = 20;     ///< largest variable count for exhaustive search
    int partition_vars = 10; ///< largest variable count for partition enumeration
};

/// base^exponent as a size, with overflow detection.
std::size_t checked_power(int base, int exponent);

/// Rank of a tuple in the lexicographic enumeration of {0..d-1}^k.
/// The first coordinate is the most significant digit.
std::size_t lex_rank(std::span<const int> tuple, int domain_size);

/// Inverse of lex_rank.
Tuple tuple_from_rank(std::size_t rank, int arity, int domain_size);

/// A finite relation: a set of arity-k tuples over {0..d-1}.
///
/// Tuples are stored deduplicated in lexicographic order, so two relations
/// with the same tuple set compare equal regardless of construction order.
class Relation {
public:
    Relation(std::string name, int arity, int domain_size, std::vector<Tuple> tuples);

    /// The full relation {0..d-1}^arity.
    static Relation full(std::string name, int arity, int domain_size);
    /// The empty relation of the given arity.
    static Relation empty(std::string name, int arity, int domain_size);

    const std::string& name() const noexcept { return name_; }
    int arity() const noexcept { return arity_; }
    int domain_size() const noexcept { return domain_size_; }
    const std::vector<Tuple>& tuples() const noexcept { return tuples_; }
    std::size_t size() const noexcept { return tuples_.size(); }
    bool is_empty() const noexcept { return tuples_.empty(); }
    bool is_full() const;

    bool contains(std::span<const int> tuple) const;

    /// Same tuple set; names are conveniences and do not take part.
    bool same_tuples(const Relation& other) const;

    Relation renamed(std::string name) const;

    friend bool operator==(const Relation& a, const Relation& b);

private:
    std::string name_;
    int arity_;
    int domain_size_;
    std::vector<Tuple> tuples_; // sorted lexicographically, no duplicates
};

/// A finitary operation f: D^m -> D stored as a value table indexed by the
/// lexicographic rank of the input tuple. Operation identity is table
/// equality; names never enter comparisons.
class Operation {
public:
    Operation(int arity, int domain_size, std::vector<int> table);

    template <typename Fn>
    static Operation from_function(int arity, int domain_size, Fn&& fn) {
        std::vector<int> table;
        const std::size_t n = checked_power(domain_size, arity);
        table.reserve(n);
        for (std::size_t r = 0; r < n; ++r)
            table.push_back(fn(tuple_from_rank(r, arity, domain_size)));
        return Operation(arity, domain_size, std::move(table));
    }

    int arity() const noexcept { return arity_; }
    int domain_size() const noexcept { return domain_size_; }
    const std::vector<int>& table() const noexcept { return table_; }

    int apply(std::span<const int> args) const;

    friend bool operator==(const Operation& a, const Operation& b) = default;
    friend auto operator<=>(const Operation& a, const Operation& b) = default;

private:
    int arity_;
    int domain_size_;
    std::vector<int> table_;
};

/// A named set of relations over one domain.
class ConstraintLanguage {
public:
    explicit ConstraintLanguage(int domain_size);
    ConstraintLanguage(int domain_size, std::vector<Relation> relations);

    void add(Relation relation);

    int domain_size() const noexcept { return domain_size_; }
    const std::map<std::string, Relation>& relations() const noexcept { return relations_; }
    bool has(const std::string& name) const;
    const Relation& relation(const std::string& name) const;
    std::size_t size() const noexcept { return relations_.size(); }

private:
    int domain_size_;
    std::map<std::string, Relation> relations_; // keyed by name, iteration is deterministic
};

using LanguagePtr = std::shared_ptr<const ConstraintLanguage>;

/// An atomic constraint R(v1, ..., vk). Repeated variables are allowed.
struct Constraint {
    std::string relation;
    std::vector<std::string> vars;

    friend bool operator==(const Constraint&, const Constraint&) = default;
};

using Assignment = std::map<std::string, int>;

enum class Quantifier { Forall, Exists };

std::string to_string(Quantifier q);

/// A conjunction of constraints over declared variables, to be solved for
/// a satisfying assignment. Immutable after construction.
class CspInstance {
public:
    CspInstance(LanguagePtr language,
                std::vector<std::string> variables,
                std::vector<Constraint> constraints);

    const ConstraintLanguage& language() const noexcept { return *language_; }
    const LanguagePtr& language_ptr() const noexcept { return language_; }
    const std::vector<std::string>& variables() const noexcept { return variables_; }
    const std::vector<Constraint>& constraints() const noexcept { return constraints_; }

private:
    LanguagePtr language_;
    std::vector<std::string> variables_;
    std::vector<Constraint> constraints_;
};

/// A CspInstance together with a quantifier prefix covering every variable
/// exactly once.
class QcspInstance {
public:
    QcspInstance(CspInstance base, std::vector<std::pair<Quantifier, std::string>> prefix);

    const CspInstance& base() const noexcept { return base_; }
    const std::vector<std::pair<Quantifier, std::string>>& prefix() const noexcept { return prefix_; }

    std::vector<std::string> universal_variables() const;
    std::vector<std::string> existential_variables() const;

private:
    CspInstance base_;
    std::vector<std::pair<Quantifier, std::string>> prefix_;
};

/// True iff the value tuple of c under a lies in the referenced relation.
/// Throws ValidationError for an unresolvable relation or unassigned variable.
bool eval_constraint(const Constraint& c, const ConstraintLanguage& lang, const Assignment& a);

/// True iff a satisfies every constraint of the instance.
bool satisfies_all(const CspInstance& inst, const Assignment& a);

/// Coordinatewise application: coordinate j of the result is
/// f(ts[0][j], ..., ts[m-1][j]). All tuples must share one arity.
Tuple apply_coordinatewise(const Operation& f, const std::vector<Tuple>& ts);

// --- file formats -----------------------------------------------------------
//
// Language file (line oriented, '#' starts a comment):
//   domain <d>
//   relation <name> <arity>
//   <one tuple per line as a digit string>
//
// Instance file:
//   vars <v1> <v2> ...
//   constraint <relname> <v...>
//
// A quantified instance file adds a single line
//   prefix A <var> E <var> ...
// listing every variable with its quantifier.

ConstraintLanguage parse_language(const std::string& text);
std::string serialize_language(const ConstraintLanguage& lang);

CspInstance parse_csp_instance(const std::string& text, LanguagePtr language);
std::string serialize_csp_instance(const CspInstance& inst);

QcspInstance parse_qcsp_instance(const std::string& text, LanguagePtr language);
std::string serialize_qcsp_instance(const QcspInstance& inst);

} // namespace polycsp
