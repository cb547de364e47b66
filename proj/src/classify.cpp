#include "polycsp/classify.hpp"

#include <algorithm>

namespace polycsp {

namespace {

void require_boolean(const ConstraintLanguage& lang) {
    if (lang.domain_size() != 2)
        throw PreconditionError("classification is defined for domain size 2");
}

} // namespace

Classification schaefer_classify(const ConstraintLanguage& lang) {
    require_boolean(lang);
    Classification out;
    out.problem = ProblemKind::Csp;
    out.witnesses = schaefer_witnesses(lang);
    out.tractable = !out.witnesses.empty();
    if (!out.tractable) out.hardness_class = "NP-complete";
    return out;
}

Classification qcsp_classify(const ConstraintLanguage& lang) {
    require_boolean(lang);
    Classification out;
    out.problem = ProblemKind::Qcsp;
    for (SchaeferOp op : schaefer_witnesses(lang))
        if (op != SchaeferOp::Const0 && op != SchaeferOp::Const1) out.witnesses.push_back(op);
    out.tractable = !out.witnesses.empty();
    if (!out.tractable) out.hardness_class = "PSPACE-complete";
    return out;
}

Classification bounded_alternation_classify(const ConstraintLanguage& lang, int k,
                                            Quantifier leading) {
    require_boolean(lang);
    const bool supported = (leading == Quantifier::Forall && k >= 2 && k % 2 == 0) ||
                           (leading == Quantifier::Exists && k >= 3 && k % 2 == 1);
    if (!supported)
        throw PreconditionError("unsupported prefix class: certified labels cover "
                                "leading-forall even k >= 2 and leading-exists odd k >= 3");

    Classification out;
    out.problem = ProblemKind::QcspPrefix;
    out.prefix_leading = leading;
    out.prefix_level = k;
    for (SchaeferOp op : schaefer_witnesses(lang))
        if (op != SchaeferOp::Const0 && op != SchaeferOp::Const1) out.witnesses.push_back(op);
    out.tractable = !out.witnesses.empty();
    if (!out.tractable) {
        const std::string greek = leading == Quantifier::Forall ? "Pi" : "Sigma";
        out.hardness_class = greek + "_" + std::to_string(k) + "^p-complete";
    }
    return out;
}

} // namespace polycsp
