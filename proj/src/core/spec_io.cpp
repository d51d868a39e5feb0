#include "core/spec_io.hpp"

#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace qmc {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument(where + ": " + what);
}

const json& need(const json& j, const char* field, const std::string& where) {
    const auto it = j.find(field);
    if (it == j.end()) fail(where, std::string("missing field '") + field + "'");
    return *it;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || item.key() == k;
        if (!ok) fail(where, "unknown field '" + item.key() + "'");
    }
}

int need_int(const json& j, const char* field, const std::string& where, int lo) {
    const json& v = need(j, field, where);
    if (!v.is_number_integer())
        fail(where + "." + field, "expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > 1 << 20) fail(where + "." + field, "out of range");
    return static_cast<int>(x);
}

double to_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

Cx parse_complex(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) fail(where, "expected a [re, im] pair");
    return {to_number(j[0], where + "[0]"), to_number(j[1], where + "[1]")};
}

ComplexMatrix parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
    const int rows = static_cast<int>(j.size());
    if (!j[0].is_array()) fail(where + "[0]", "expected an array of [re, im] pairs");
    const int cols = static_cast<int>(j[0].size());
    if (cols == 0) fail(where + "[0]", "empty row");
    ComplexMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const std::string row_at = where + "[" + std::to_string(r) + "]";
        if (!j[static_cast<std::size_t>(r)].is_array() ||
            static_cast<int>(j[static_cast<std::size_t>(r)].size()) != cols)
            fail(row_at, "rows must have equal length");
        for (int c = 0; c < cols; ++c)
            m.at(r, c) = parse_complex(j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)],
                                       row_at + "[" + std::to_string(c) + "]");
    }
    return m;
}

std::vector<double> parse_real_vector(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(to_number(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

std::vector<std::vector<double>> parse_real_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
    std::vector<std::vector<double>> m;
    for (std::size_t r = 0; r < j.size(); ++r)
        m.push_back(parse_real_vector(j[r], where + "[" + std::to_string(r) + "]"));
    for (const auto& row : m)
        if (row.size() != m.size()) fail(where, "transition matrix must be square");
    return m;
}

// Accepts a bare matrix array or an object with one of the named forms.
DensityMatrix parse_state_doc(const json& j, const std::string& where, int expect_dim) {
    try {
        if (j.is_array()) {
            const ComplexMatrix m = parse_matrix(j, where);
            if (expect_dim > 0 && m.rows() != expect_dim)
                fail(where, "dimension " + std::to_string(m.rows()) + " does not match expected " +
                                std::to_string(expect_dim));
            return DensityMatrix(m);
        }
        if (!j.is_object()) fail(where, "expected a state object or matrix");
        reject_unknown(j, {"dim", "basis", "maximally_mixed", "matrix"}, where);
        if (j.contains("matrix")) {
            const ComplexMatrix m = parse_matrix(j["matrix"], where + ".matrix");
            if (expect_dim > 0 && m.rows() != expect_dim) fail(where, "dimension mismatch");
            return DensityMatrix(m);
        }
        int dim = expect_dim;
        if (j.contains("dim")) {
            dim = need_int(j, "dim", where, 1);
            if (expect_dim > 0 && dim != expect_dim) fail(where + ".dim", "dimension mismatch");
        }
        if (dim <= 0) fail(where, "need 'dim' alongside 'basis' or 'maximally_mixed'");
        if (j.contains("basis")) {
            const int k = need_int(j, "basis", where, 0);
            if (k >= dim) fail(where + ".basis", "basis index out of range");
            return DensityMatrix::basis(dim, k);
        }
        if (j.contains("maximally_mixed")) {
            if (!j["maximally_mixed"].is_boolean() || !j["maximally_mixed"].get<bool>())
                fail(where + ".maximally_mixed", "expected true");
            return DensityMatrix::maximally_mixed(dim);
        }
        fail(where, "expected 'matrix', 'basis', or 'maximally_mixed'");
    } catch (const json::exception& e) {
        fail(where, e.what());
    }
}

json parse_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string(what) + ": " + e.what());
    }
}

}  // namespace

ParsedChannel parse_channel_json(const std::string& text) {
    const json doc = parse_text(text, "channel");
    if (!doc.is_object()) fail("channel", "top level must be an object");
    reject_unknown(doc, {"dims", "unitary", "unitaries", "env_reset", "initial_memory", "markov"},
                   "channel");

    ParsedChannel out;
    if (doc.contains("markov")) {
        if (doc.contains("unitary") || doc.contains("unitaries"))
            fail("channel", "'markov' and 'unitary' are mutually exclusive");
        const json& mk = doc["markov"];
        if (!mk.is_object()) fail("channel.markov", "expected an object");
        reject_unknown(mk, {"transition", "kraus", "fixed_point_form", "initial_distribution"},
                       "channel.markov");
        MarkovChannelSpec m;
        m.transition = parse_real_matrix(need(mk, "transition", "channel.markov"),
                                         "channel.markov.transition");
        const json& kraus = need(mk, "kraus", "channel.markov");
        if (!kraus.is_array() || kraus.empty())
            fail("channel.markov.kraus", "expected a non-empty array of matrices");
        for (std::size_t i = 0; i < kraus.size(); ++i)
            m.kraus_unitaries.push_back(
                parse_matrix(kraus[i], "channel.markov.kraus[" + std::to_string(i) + "]"));
        if (mk.contains("fixed_point_form")) {
            if (!mk["fixed_point_form"].is_boolean())
                fail("channel.markov.fixed_point_form", "expected a boolean");
            m.fixed_point_form = mk["fixed_point_form"].get<bool>();
        }
        if (mk.contains("initial_distribution"))
            m.initial_distribution = parse_real_vector(mk["initial_distribution"],
                                                       "channel.markov.initial_distribution");
        out.spec = build_markov_channel(m);
        out.markov = std::move(m);
    } else {
        const json& dims = need(doc, "dims", "channel");
        if (!dims.is_object()) fail("channel.dims", "expected an object");
        reject_unknown(dims, {"q", "m", "e"}, "channel.dims");
        const int q = need_int(dims, "q", "channel.dims", 2);
        const int dm = need_int(dims, "m", "channel.dims", 1);
        const int de = need_int(dims, "e", "channel.dims", 1);

        std::vector<ComplexMatrix> steps;
        if (doc.contains("unitary") == doc.contains("unitaries"))
            fail("channel", "need exactly one of 'unitary' or 'unitaries'");
        if (doc.contains("unitary")) {
            steps.push_back(parse_matrix(doc["unitary"], "channel.unitary"));
        } else {
            const json& us = doc["unitaries"];
            if (!us.is_array() || us.empty())
                fail("channel.unitaries", "expected a non-empty array of matrices");
            for (std::size_t i = 0; i < us.size(); ++i)
                steps.push_back(parse_matrix(us[i], "channel.unitaries[" + std::to_string(i) + "]"));
        }

        CVec env_reset = basis_vec(de, 0);
        if (doc.contains("env_reset")) {
            const json& er = doc["env_reset"];
            if (!er.is_object() || !er.contains("basis"))
                fail("channel.env_reset", "expected {\"basis\": k}");
            reject_unknown(er, {"basis"}, "channel.env_reset");
            const int k = need_int(er, "basis", "channel.env_reset", 0);
            if (k >= de) fail("channel.env_reset.basis", "basis index out of range");
            env_reset = basis_vec(de, k);
        }

        DensityMatrix memory = DensityMatrix::basis(dm, 0);
        if (doc.contains("initial_memory"))
            memory = parse_state_doc(doc["initial_memory"], "channel.initial_memory", dm);

        out.spec = ChannelSpec::make(q, dm, de, std::move(steps), std::move(env_reset),
                                     std::move(memory));
    }

    if (doc.contains("dims") && out.markov) {
        const json& dims = doc["dims"];
        if (!dims.is_object()) fail("channel.dims", "expected an object");
        reject_unknown(dims, {"q", "m", "e"}, "channel.dims");
        if (need_int(dims, "q", "channel.dims", 1) != out.spec.d_q ||
            need_int(dims, "m", "channel.dims", 1) != out.spec.d_m ||
            need_int(dims, "e", "channel.dims", 1) != out.spec.d_e)
            fail("channel.dims", "does not match the markov construction");
    }
    if (doc.contains("initial_memory") && out.markov) {
        if (!out.markov->initial_distribution.empty())
            fail("channel", "'initial_memory' conflicts with markov.initial_distribution");
        out.spec.initial_memory =
            parse_state_doc(doc["initial_memory"], "channel.initial_memory", out.spec.d_m);
    }
    if (doc.contains("env_reset") && out.markov)
        fail("channel", "'env_reset' is fixed by the markov construction");
    return out;
}

DensityMatrix parse_state_json(const std::string& text) {
    return parse_state_doc(parse_text(text, "state"), "state", -1);
}

CQEnsemble parse_ensemble_json(const std::string& text) {
    const json doc = parse_text(text, "ensemble");
    if (!doc.is_object()) fail("ensemble", "top level must be an object");
    reject_unknown(doc, {"probs", "states"}, "ensemble");
    CQEnsemble e;
    e.probs = parse_real_vector(need(doc, "probs", "ensemble"), "ensemble.probs");
    const json& states = need(doc, "states", "ensemble");
    if (!states.is_array() || states.empty())
        fail("ensemble.states", "expected a non-empty array of states");
    for (std::size_t i = 0; i < states.size(); ++i)
        e.states.push_back(
            parse_state_doc(states[i], "ensemble.states[" + std::to_string(i) + "]", -1));
    return e;
}

}  // namespace qmc
