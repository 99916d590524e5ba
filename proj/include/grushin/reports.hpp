#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "grushin/extension.hpp"
#include "grushin/functionals.hpp"
#include "grushin/solver.hpp"

namespace grushin {

using json = nlohmann::json;

inline json params_json(const GrushinParams& gp) {
    return json{{"m", gp.m}, {"k", gp.k}, {"alpha", gp.alpha}, {"q", gp.q}};
}

inline json to_json(const GrushinParams& gp, const RellichReport& rep,
                    const json& refinement = json::array()) {
    json terms;
    terms["ell"] = rep.ell;
    terms["s"] = rep.s_exp;
    terms["t_inner"] = rep.t_inner;
    terms["t_outer"] = rep.t_outer;
    terms["lhs"] = rep.lhs;
    terms["rhs"] = rep.rhs;
    if (rep.flagged) terms["note"] = rep.note;
    return json{{"kind", "rellich"},
                {"params", params_json(gp)},
                {"terms", terms},
                {"residual", rep.residual},
                {"scale", rep.scale},
                {"verdict", ""},
                {"refinement", refinement}};
}

inline json to_json(const GrushinParams& gp, const LowerBoundReport& rep) {
    json terms;
    terms["r_grid"] = rep.r_grid;
    terms["masses"] = rep.masses;
    terms["masses_refined"] = rep.masses_ref;
    terms["m_hat"] = rep.m_hat;
    terms["m_hat_refined"] = rep.m_hat_ref;
    return json{{"kind", "ring_lower_bound"},
                {"params", params_json(gp)},
                {"terms", terms},
                {"residual", rep.m_hat - rep.m_hat_ref},
                {"scale", std::abs(rep.m_hat_ref)},
                {"verdict", ""},
                {"refinement", json::array()}};
}

inline json to_json(const GrushinParams& gp, const ThresholdReport& rep) {
    json rows = json::array();
    for (const auto& row : rep.rows)
        rows.push_back(json{{"p", row.p},
                            {"increments", row.increments},
                            {"cumulative", row.cumulative},
                            {"verdict", row.verdict}});
    return json{{"kind", "lp_threshold"},
                {"params", params_json(gp)},
                {"terms", json{{"p_star", rep.p_star}, {"ladder", rep.ladder}, {"rows", rows}}},
                {"residual", 0.0},
                {"scale", 0.0},
                {"verdict", ""},
                {"refinement", json::array()}};
}

inline json to_json(const GrushinParams& gp, const MmsReport& rep) {
    return json{{"kind", "mms"},
                {"params", params_json(gp)},
                {"terms", json{{"h", rep.hs}, {"max_error", rep.errors}, {"slope", rep.slope}}},
                {"residual", rep.slope - 2.0},
                {"scale", 2.0},
                {"verdict", ""},
                {"refinement", json::array()}};
}

// --- trace CSV: header `kind,t,value,ell_or_p` -------------------------------

inline void write_trace_csv(const std::vector<FunctionalTrace>& traces, std::ostream& os) {
    os << "kind,t,value,ell_or_p\n";
    char buf[128];
    for (const auto& tr : traces) {
        for (const auto& [t, v] : tr.samples) {
            if (std::isnan(tr.ell_or_p))
                std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,\n", trace_kind_name(tr.kind), t,
                              v);
            else
                std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n",
                              trace_kind_name(tr.kind), t, v, tr.ell_or_p);
            os << buf;
        }
    }
}

/// Write-then-rename so concurrent experiments never see partial files.
inline void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw Error("atomic_write: cannot open " + tmp);
        os << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("atomic_write: rename failed for " + path);
}

} // namespace grushin
