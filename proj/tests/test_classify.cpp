#include "polycsp/classify.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>

using namespace polycsp;
using namespace polycsp::testing;

TEST_SUITE("classify") {

TEST_CASE("the named hard languages are NP-complete") {
    for (const LanguagePtr& lang :
         {gamma3(), nae_lang(), one_in_three_lang(), c0c1s_lang()}) {
        const Classification c = schaefer_classify(*lang);
        CHECK_FALSE(c.tractable);
        CHECK(c.hardness_class == "NP-complete");
        CHECK(c.witnesses.empty());
    }
}

TEST_CASE("the named tractable languages carry their witnesses") {
    const Classification horn = schaefer_classify(*horn_lang());
    CHECK(horn.tractable);
    CHECK(std::count(horn.witnesses.begin(), horn.witnesses.end(), SchaeferOp::And) == 1);

    const Classification two = schaefer_classify(*twoclause_lang());
    CHECK(two.tractable);
    CHECK(two.witnesses == std::vector<SchaeferOp>{SchaeferOp::Majority});

    const Classification affine = schaefer_classify(*affine_lang());
    CHECK(affine.tractable);
    CHECK(affine.witnesses == std::vector<SchaeferOp>{SchaeferOp::Minority});
}

TEST_CASE("an empty language is preserved by everything") {
    const ConstraintLanguage empty(2);
    const Classification c = schaefer_classify(empty);
    CHECK(c.tractable);
    CHECK(c.witnesses.size() == 6);

    // A language of empty relations is preserved vacuously as well.
    const Classification hollow =
        schaefer_classify(*lang_ptr({Relation::empty("E", 2, 2)}));
    CHECK(hollow.tractable);
    CHECK(hollow.witnesses.size() == 6);
}

TEST_CASE("classification needs a boolean domain") {
    const ConstraintLanguage ternary(3);
    CHECK_THROWS_AS(schaefer_classify(ternary), PreconditionError);
    CHECK_THROWS_AS(qcsp_classify(ternary), PreconditionError);
}

TEST_CASE("quantified classification drops the constant witnesses") {
    const Classification hard = qcsp_classify(*gamma3());
    CHECK_FALSE(hard.tractable);
    CHECK(hard.hardness_class == "PSPACE-complete");

    const Classification two = qcsp_classify(*twoclause_lang());
    CHECK(two.tractable);
    CHECK(two.witnesses == std::vector<SchaeferOp>{SchaeferOp::Majority});
}

TEST_CASE("constants alone do not rescue the quantified problem") {
    // Both constant tuples everywhere, none of the four shared-shape
    // operations; witness sets confirmed by direct enumeration.
    auto lang = constants_only_lang();
    const Classification csp = schaefer_classify(*lang);
    CHECK(csp.tractable);
    CHECK(csp.witnesses == std::vector<SchaeferOp>{SchaeferOp::Const0, SchaeferOp::Const1});
    for (SchaeferOp op : kSchaeferOps) {
        const bool preserved = is_polymorphism(schaefer_operation(op), *lang);
        const bool expected = op == SchaeferOp::Const0 || op == SchaeferOp::Const1;
        CHECK(preserved == expected);
    }

    const Classification qcsp = qcsp_classify(*lang);
    CHECK_FALSE(qcsp.tractable);
    CHECK(qcsp.hardness_class == "PSPACE-complete");
}

TEST_CASE("bounded alternation labels follow the level and leading quantifier") {
    const Classification pi2 = bounded_alternation_classify(*gamma3(), 2, Quantifier::Forall);
    CHECK_FALSE(pi2.tractable);
    CHECK(pi2.hardness_class == "Pi_2^p-complete");
    CHECK(pi2.prefix_level == 2);

    const Classification sigma3 =
        bounded_alternation_classify(*twoclause_lang(), 3, Quantifier::Exists);
    CHECK(sigma3.tractable);
    CHECK(sigma3.witnesses == std::vector<SchaeferOp>{SchaeferOp::Majority});

    const Classification pi4 = bounded_alternation_classify(*gamma3(), 4, Quantifier::Forall);
    CHECK(pi4.hardness_class == "Pi_4^p-complete");
}

TEST_CASE("uncertified prefix classes are rejected") {
    CHECK_THROWS_AS(bounded_alternation_classify(*gamma3(), 2, Quantifier::Exists),
                    PreconditionError);
    CHECK_THROWS_AS(bounded_alternation_classify(*gamma3(), 1, Quantifier::Forall),
                    PreconditionError);
    CHECK_THROWS_AS(bounded_alternation_classify(*gamma3(), 3, Quantifier::Forall),
                    PreconditionError);
    CHECK_THROWS_AS(bounded_alternation_classify(*gamma3(), 1, Quantifier::Exists),
                    PreconditionError);
}

TEST_CASE("hardness coincides with a small clone of essentially unary permutations") {
    // A clone of essentially unary operations can still hold a constant, and
    // constants keep the plain problem tractable; hardness therefore needs
    // every small polymorphism to be essentially unary AND act as a
    // permutation.
    Rng rng(191919);
    for (int trial = 0; trial < 60; ++trial) {
        LanguagePtr lang = random_language(rng, 3, 3);
        bool all_unary_permutations = true;
        for (int arity = 1; arity <= 3 && all_unary_permutations; ++arity)
            for (const Operation& f : polymorphisms_of_arity(*lang, arity))
                if (!acts_as_permutation(f)) {
                    all_unary_permutations = false;
                    break;
                }
        CHECK(schaefer_classify(*lang).tractable == !all_unary_permutations);
    }
}

TEST_CASE("a constant witness defeats the purely unary reading of hardness") {
    // Preserved by the constant 0 only, so tractable, although every small
    // polymorphism is essentially unary.
    auto lang = lang_ptr({rel("R", 3, {"000", "011", "110"})});
    const Classification c = schaefer_classify(*lang);
    CHECK(c.tractable);
    CHECK(c.witnesses == std::vector<SchaeferOp>{SchaeferOp::Const0});
    for (int arity = 1; arity <= 3; ++arity)
        for (const Operation& f : polymorphisms_of_arity(*lang, arity))
            CHECK(essentially_unary_witness(f).has_value());
}

TEST_CASE("adding a relation can only shrink the witness set") {
    Rng rng(202020);
    for (int trial = 0; trial < 60; ++trial) {
        LanguagePtr small = random_language(rng, 2, 3);
        std::vector<Relation> grown;
        for (const auto& [name, r] : small->relations()) grown.push_back(r);
        grown.push_back(random_relation(rng, "EXTRA", 1 + rng.below(3), 4));
        LanguagePtr large = lang_ptr(std::move(grown));

        const auto ws = schaefer_classify(*small).witnesses;
        const auto wl = schaefer_classify(*large).witnesses;
        for (SchaeferOp op : wl) CHECK(std::count(ws.begin(), ws.end(), op) == 1);
    }
}

TEST_CASE("quantified witnesses are the plain witnesses without the constants") {
    Rng rng(212121);
    for (int trial = 0; trial < 60; ++trial) {
        LanguagePtr lang = random_language(rng, 3, 3);
        const auto csp = schaefer_classify(*lang).witnesses;
        const auto qcsp = qcsp_classify(*lang).witnesses;
        std::vector<SchaeferOp> expected;
        for (SchaeferOp op : csp)
            if (op != SchaeferOp::Const0 && op != SchaeferOp::Const1) expected.push_back(op);
        CHECK(qcsp == expected);
    }
}

} // TEST_SUITE
