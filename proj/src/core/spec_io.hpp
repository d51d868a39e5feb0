#pragma once

#include <optional>
#include <string>

#include "core/channels.hpp"
#include "core/entropics.hpp"

// JSON document ingestion. All parsers throw std::invalid_argument carrying
// the offending field path so callers can surface actionable messages.

namespace qmc {

// A parsed channel document. When the document used a markov constructor the
// inputs are kept so downstream checks can rebuild the alternate form.
struct ParsedChannel {
    ChannelSpec spec;
    std::optional<MarkovChannelSpec> markov;
};

// Channel document:
//   {"dims": {"q": 2, "m": 1, "e": 2},
//    "unitary": [[[re, im], ...], ...]           (or "unitaries": [U, ...])
//    "env_reset": {"basis": 0},                  (optional)
//    "initial_memory": {"basis": 0} | matrix,    (optional)
//    "markov": {"transition": [[..]], "kraus": [U, ...],
//               "fixed_point_form": bool, "initial_distribution": [..]}}
// A markov block replaces the unitary; dims, when also given, must agree with
// the constructed channel.
ParsedChannel parse_channel_json(const std::string& text);

// State document: {"dim": d, "basis": k} | {"dim": d, "maximally_mixed": true}
// | {"matrix": [[[re, im], ...], ...]} | a bare matrix array.
DensityMatrix parse_state_json(const std::string& text);

// Ensemble document: {"probs": [..], "states": [state, ...]}.
CQEnsemble parse_ensemble_json(const std::string& text);

}  // namespace qmc
