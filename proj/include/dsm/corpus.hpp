#pragma once

// Built-in test problems with oracle roots and recommended configurations,
// shared by tests, audits and the CLI.

#include "dsm/core.hpp"
#include "dsm/fields.hpp"
#include "dsm/linreg.hpp"
#include "dsm/monotone.hpp"

namespace dsm::corpus {

/// Diagonal spectral demonstration problem for the regularized linear flow.
struct SpectralSetup {
    linreg::SpectralOperator op;
    Vector f;
    Vector u0;
};

struct CorpusEntry {
    std::string name;
    std::string notes;
    std::optional<ProblemSpec> problem;
    std::optional<monotone::MonotoneProblem> monotone_problem;
    std::optional<SpectralSetup> spectral;
    Ball recommended_ball;
    std::vector<fields::Kind> recommended_fields;
    // Rates for entries whose flow is certified through the a != 2 theory.
    std::optional<RateFunctions> rates;
    // Builder for the entry's bespoke field, when not one of the six kinds.
    std::function<fields::PhiField()> custom_field;
    std::optional<Vector> oracle_root;
};

[[nodiscard]] const std::vector<CorpusEntry>& corpus();
[[nodiscard]] const CorpusEntry* find(std::string_view name);

}  // namespace dsm::corpus
