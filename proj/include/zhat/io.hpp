#pragma once

#include <string>

#include "density.hpp"
#include "measure.hpp"
#include "verify.hpp"

namespace zhat {

inline Json to_json(const Bracket& b) { return detail::bracket_json(b); }

inline Json to_json(const DensityReport& r) {
    Json j;
    j["method"] = r.method;
    j["params"] = r.params;
    j["grid"] = r.grid;
    j["values"] = r.values;
    if (!r.values_lo.empty()) j["values_lo"] = r.values_lo;
    if (!r.values_hi.empty()) j["values_hi"] = r.values_hi;
    j["lower_est"] = r.lower_est;
    j["upper_est"] = r.upper_est;
    if (r.increment_est) j["increment_est"] = *r.increment_est;
    j["certified"] = r.certified;
    j["notes"] = r.notes;
    return j;
}

inline Json to_json(const MeasureTrace& t) {
    Json levels = Json::array();
    for (const auto& l : t.levels)
        levels.push_back({{"level_index", l.index},
                          {"modulus", l.modulus},
                          {"residue_count", l.residue_count},
                          {"measure", to_string(l.measure)},
                          {"measure_float", to_double(l.measure)},
                          {"mode", to_string(l.mode)}});
    Json j{{"chain", t.chain}, {"dim", t.dim}, {"levels", levels}, {"certified", t.certified}, {"complete", t.complete}};
    if (t.assumes_dirichlet) j["assumes_dirichlet"] = true;
    j["notes"] = t.notes;
    return j;
}

inline Json to_json(const VerificationReport& r) {
    return Json{{"theorem", r.theorem}, {"inputs", r.inputs}, {"quantities", r.quantities}, {"verdict", to_string(r.verdict)}, {"narrative", r.narrative}};
}

} // namespace zhat
