#include "cantor/io.hpp"

#include <cinttypes>
#include <climits>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace cantor {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw SchemaError(path + ": " + msg);
}

const Json& need(const Json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
    return *it;
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& path) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) known = true;
        if (!known) fail(path + "." + item.key(), "unexpected key");
    }
}

int as_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    long long v = j.get<long long>();
    if (v < INT_MIN || v > INT_MAX) fail(path, "integer out of range");
    return static_cast<int>(v);
}

double as_double(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

std::string as_string(const Json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::string big_str(const BigInt& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

BigInt as_bigint(const Json& j, const std::string& path) {
    if (j.is_number_integer()) return BigInt(j.get<long long>());
    if (j.is_string()) {
        try {
            return BigInt(j.get<std::string>());
        } catch (const std::exception&) {
            fail(path, "not a decimal integer string");
        }
    }
    fail(path, "expected an integer or a decimal string");
}

Word as_word(const Json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of letters");
    Word w;
    for (std::size_t i = 0; i < j.size(); ++i) w.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
    return w;
}

Json word_json(const Word& w) {
    Json a = Json::array();
    for (int x : w) a.push_back(x);
    return a;
}

Json double_or_null(double v) {
    if (std::isnan(v) || std::isinf(v)) return nullptr;
    return v;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Json spec_to_json(const TreeMappingSpec& s) {
    Json j;
    j["q"] = s.params.q;
    j["b"] = s.params.b;
    j["label"] = s.label;
    j["base_residues"] = s.base_residues;

    Json tr;
    switch (s.tail_rule.kind) {
        case TailRule::Kind::AllZero:
            tr["kind"] = "all_zero";
            break;
        case TailRule::Kind::SparsePowers: {
            tr["kind"] = "sparse_powers";
            tr["digit"] = s.tail_rule.digit;
            if (s.tail_rule.growth) tr["growth"] = s.tail_rule.growth->name();
            if (!s.tail_rule.m_seq.empty()) {
                Json seq = Json::array();
                for (const BigInt& m : s.tail_rule.m_seq) seq.push_back(big_str(m));
                tr["m_seq"] = seq;
            }
            break;
        }
        case TailRule::Kind::LengthRamp:
            tr["kind"] = "length_ramp";
            tr["digit"] = s.tail_rule.digit;
            tr["rate"] = s.tail_rule.ramp_rate;
            break;
        case TailRule::Kind::IndexLogLog:
            tr["kind"] = "index_loglog";
            tr["digit"] = s.tail_rule.digit;
            tr["base"] = s.tail_rule.loglog_base;
            break;
        case TailRule::Kind::Custom: {
            tr["kind"] = "custom";
            Json table = Json::array();
            for (const auto& [word, entries] : s.tail_rule.custom)
                for (const auto& [level, digit] : entries) {
                    Json row;
                    row["word"] = word_json(word);
                    row["level"] = big_str(level);
                    row["digit"] = digit;
                    table.push_back(row);
                }
            tr["table"] = table;
            break;
        }
    }
    j["tail_rule"] = tr;

    Json ov = Json::array();
    for (const auto& [word, digit] : s.overrides) {
        Json row;
        row["word"] = word_json(word);
        row["digit"] = digit;
        ov.push_back(row);
    }
    j["overrides"] = ov;

    Json ir = Json::array();
    for (const IrregularPath& path : s.irregular) {
        Json row;
        row["stem"] = word_json(path.stem);
        row["tail_digit"] = path.tail_digit;
        ir.push_back(row);
    }
    j["irregular_paths"] = ir;

    Json zt = Json::array();
    for (const Word& w : s.zero_tail_stems) zt.push_back(word_json(w));
    j["zero_tail_stems"] = zt;
    return j;
}

TreeMappingSpec spec_from_json(const Json& j) {
    const std::string root = "$";
    if (!j.is_object()) fail(root, "expected an object");
    check_keys(j,
               {"q", "b", "label", "base_residues", "tail_rule", "overrides", "irregular_paths",
                "zero_tail_stems"},
               root);

    TreeMappingSpec s;
    int q = as_int(need(j, "q", root), "$.q");
    int b = as_int(need(j, "b", root), "$.b");
    try {
        s.params = make_params(q, b);
    } catch (const std::invalid_argument& e) {
        fail("$.q", e.what());
    }
    if (j.contains("label")) s.label = as_string(j["label"], "$.label");

    const Json& br = need(j, "base_residues", root);
    if (!br.is_array()) fail("$.base_residues", "expected an array");
    if (br.size() != static_cast<std::size_t>(q))
        fail("$.base_residues", "expected exactly q = " + std::to_string(q) + " entries");
    for (std::size_t i = 0; i < br.size(); ++i)
        s.base_residues.push_back(as_int(br[i], "$.base_residues[" + std::to_string(i) + "]"));

    const Json& tr = need(j, "tail_rule", root);
    const std::string tp = "$.tail_rule";
    if (!tr.is_object()) fail(tp, "expected an object");
    std::string kind = as_string(need(tr, "kind", tp), tp + ".kind");
    if (kind == "all_zero") {
        check_keys(tr, {"kind"}, tp);
        s.tail_rule.kind = TailRule::Kind::AllZero;
    } else if (kind == "sparse_powers") {
        check_keys(tr, {"kind", "digit", "growth", "m_seq"}, tp);
        s.tail_rule.kind = TailRule::Kind::SparsePowers;
        s.tail_rule.digit = as_int(need(tr, "digit", tp), tp + ".digit");
        if (tr.contains("growth")) {
            try {
                s.tail_rule.growth = GrowthSpec::parse(as_string(tr["growth"], tp + ".growth"));
            } catch (const std::invalid_argument& e) {
                fail(tp + ".growth", e.what());
            }
        }
        if (tr.contains("m_seq")) {
            const Json& seq = tr["m_seq"];
            if (!seq.is_array()) fail(tp + ".m_seq", "expected an array");
            for (std::size_t i = 0; i < seq.size(); ++i)
                s.tail_rule.m_seq.push_back(as_bigint(seq[i], tp + ".m_seq[" + std::to_string(i) + "]"));
        }
        if (!s.tail_rule.growth && s.tail_rule.m_seq.empty())
            fail(tp, "sparse_powers needs 'growth' or a nonempty 'm_seq'");
    } else if (kind == "length_ramp") {
        check_keys(tr, {"kind", "digit", "rate"}, tp);
        s.tail_rule.kind = TailRule::Kind::LengthRamp;
        s.tail_rule.digit = as_int(need(tr, "digit", tp), tp + ".digit");
        s.tail_rule.ramp_rate = as_double(need(tr, "rate", tp), tp + ".rate");
    } else if (kind == "index_loglog") {
        check_keys(tr, {"kind", "digit", "base"}, tp);
        s.tail_rule.kind = TailRule::Kind::IndexLogLog;
        s.tail_rule.digit = as_int(need(tr, "digit", tp), tp + ".digit");
        s.tail_rule.loglog_base = as_double(need(tr, "base", tp), tp + ".base");
    } else if (kind == "custom") {
        check_keys(tr, {"kind", "table"}, tp);
        s.tail_rule.kind = TailRule::Kind::Custom;
        const Json& table = need(tr, "table", tp);
        if (!table.is_array()) fail(tp + ".table", "expected an array");
        for (std::size_t i = 0; i < table.size(); ++i) {
            std::string rp = tp + ".table[" + std::to_string(i) + "]";
            const Json& row = table[i];
            if (!row.is_object()) fail(rp, "expected an object");
            check_keys(row, {"word", "level", "digit"}, rp);
            Word w = as_word(need(row, "word", rp), rp + ".word");
            BigInt level = as_bigint(need(row, "level", rp), rp + ".level");
            int digit = as_int(need(row, "digit", rp), rp + ".digit");
            auto& entries = s.tail_rule.custom[w];
            for (const auto& [lv, dg] : entries)
                if (lv == level) fail(rp + ".level", "duplicate level for this word");
            entries.emplace_back(level, digit);
        }
    } else {
        fail(tp + ".kind", "unknown kind '" + kind + "'");
    }

    if (j.contains("overrides")) {
        const Json& ov = j["overrides"];
        if (!ov.is_array()) fail("$.overrides", "expected an array");
        for (std::size_t i = 0; i < ov.size(); ++i) {
            std::string rp = "$.overrides[" + std::to_string(i) + "]";
            const Json& row = ov[i];
            if (!row.is_object()) fail(rp, "expected an object");
            check_keys(row, {"word", "digit"}, rp);
            Word w = as_word(need(row, "word", rp), rp + ".word");
            if (s.overrides.count(w)) fail(rp + ".word", "duplicate override word");
            s.overrides[w] = as_int(need(row, "digit", rp), rp + ".digit");
        }
    }
    if (j.contains("irregular_paths")) {
        const Json& ir = j["irregular_paths"];
        if (!ir.is_array()) fail("$.irregular_paths", "expected an array");
        for (std::size_t i = 0; i < ir.size(); ++i) {
            std::string rp = "$.irregular_paths[" + std::to_string(i) + "]";
            const Json& row = ir[i];
            if (!row.is_object()) fail(rp, "expected an object");
            check_keys(row, {"stem", "tail_digit"}, rp);
            IrregularPath path;
            path.stem = as_word(need(row, "stem", rp), rp + ".stem");
            path.tail_digit = as_int(need(row, "tail_digit", rp), rp + ".tail_digit");
            s.irregular.push_back(path);
        }
    }
    if (j.contains("zero_tail_stems")) {
        const Json& zt = j["zero_tail_stems"];
        if (!zt.is_array()) fail("$.zero_tail_stems", "expected an array");
        for (std::size_t i = 0; i < zt.size(); ++i)
            s.zero_tail_stems.push_back(as_word(zt[i], "$.zero_tail_stems[" + std::to_string(i) + "]"));
    }
    return s;
}

Json validation_to_json(const ValidationReport& r) {
    Json j;
    j["ok"] = r.ok;
    Json issues = Json::array();
    for (const ValidationIssue& is : r.issues) {
        Json row;
        row["node"] = is.node;
        row["message"] = is.message;
        issues.push_back(row);
    }
    j["issues"] = issues;
    return j;
}

Json classification_to_json(const Classification& c) {
    Json j;
    j["q"] = c.q;
    j["b"] = c.b;
    j["gcd"] = c.gcd;
    j["kind"] = to_string(c.kind);
    j["unknown_spectrality"] = c.unknown_spectrality;
    j["hadamard"] = c.hadamard;
    j["note"] = c.note;
    return j;
}

Json criterion_to_json(const CriterionReport& r) {
    Json j;
    j["c1_interval"] = {r.c1_interval.first, r.c1_interval.second};
    j["c2_interval"] = {r.c2_interval.first, r.c2_interval.second};
    j["alpha"] = r.alpha;
    j["gaps"] = r.gaps;
    j["window_exponents"] = r.window_exponents;
    j["partial_sums_divergence"] = r.sums_i;
    j["level_exponents"] = r.level_exponents;
    j["level_terms"] = r.terms_ii;
    j["partial_sums_convergence"] = r.sums_ii;
    j["horizon"] = r.horizon;
    j["conclusion"] = to_string(r.conclusion);
    j["detail"] = r.detail;
    return j;
}

Json verdict_to_json(const Verdict& v) {
    Json j;
    j["kind"] = to_string(v.kind);
    j["label"] = v.label;
    j["q"] = v.params.q;
    j["b"] = v.params.b;
    j["numerical_only"] = v.numerical_only;
    j["terms"] = v.terms;
    j["policy"] = {{"depth", v.policy.depth}, {"tail_tol", v.policy.tail_tol}};
    j["constants"] = {{"c_min", {v.constants.c_min_lo, v.constants.c_min_hi}},
                      {"c_max", {v.constants.c_max_lo, v.constants.c_max_hi}},
                      {"resolution", v.constants.resolution}};
    j["criteria"] = criterion_to_json(v.criteria);
    Json grid = Json::array();
    for (const QValue& qv : v.grid) {
        Json row;
        row["xi"] = qv.xi;
        row["Q"] = qv.Q;
        row["error_budget"] = qv.error_budget;
        row["terms"] = qv.terms;
        grid.push_back(row);
    }
    j["grid"] = grid;
    j["worst_abs_dev"] = v.worst_abs_dev;
    if (!std::isnan(v.identity_dev))
        j["identity"] = {{"level", v.identity_level}, {"max_abs_dev", v.identity_dev}};
    j["remaining_mass"] = {{"bound", double_or_null(v.remaining.bound)},
                           {"verified_levels", v.remaining.verified_levels},
                           {"assumed_increment", v.remaining.assumed_increment},
                           {"level_ratio", double_or_null(v.remaining.level_ratio)},
                           {"assumption", v.remaining.assumption}};
    if (v.deficit_witness)
        j["deficit"] = {{"xi0", v.deficit_witness->xi},
                        {"Q", v.deficit_witness->Q},
                        {"error_budget", v.deficit_witness->error_budget},
                        {"total_upper_bound", v.deficit_total}};
    Json surv = Json::array();
    for (const BigInt& t : v.maximality.survivors) surv.push_back(big_str(t));
    j["maximality"] = {{"window", v.maximality.window},
                       {"prefix", v.maximality.prefix},
                       {"survivors", surv}};
    j["explanation"] = v.explanation;
    return j;
}

Json comparison_to_json(const RegularizedComparison& rc) {
    Json j;
    j["base"] = verdict_to_json(rc.base);
    j["regularized"] = verdict_to_json(rc.regularized);
    j["agree"] = rc.agree;
    return j;
}

Json reconstruction_to_json(const Reconstruction& r) {
    Json j;
    j["ok"] = r.ok;
    Json asg = Json::array();
    for (const auto& [word, digit] : r.assignments) {
        Json row;
        row["word"] = word_json(word);
        row["digit"] = digit;
        asg.push_back(row);
    }
    j["assignments"] = asg;
    Json und = Json::array();
    for (const Word& w : r.undetermined) und.push_back(word_json(w));
    j["undetermined"] = und;
    Json vio = Json::array();
    for (const auto& v : r.violations) {
        Json row;
        row["kind"] = v.kind;
        row["a"] = big_str(v.a);
        row["b"] = big_str(v.b);
        row["detail"] = v.detail;
        vio.push_back(row);
    }
    j["violations"] = vio;
    return j;
}

Json stats_to_json(const DigitStats& s) {
    Json j;
    j["q"] = s.q;
    j["levels"] = s.levels;
    Json mn = Json::array();
    for (const BigInt& v : s.max_N) mn.push_back(big_str(v));
    j["max_N"] = mn;
    j["max_Nstar"] = s.max_Nstar;
    j["min_Nstar"] = s.min_Nstar;
    return j;
}

Json density_to_json(const std::vector<DensityRow>& rows) {
    Json arr = Json::array();
    for (const DensityRow& r : rows) {
        Json row;
        row["log2_R"] = r.log2_R;
        row["count"] = r.count;
        row["g"] = r.g_value;
        row["ratio"] = r.ratio;
        arr.push_back(row);
    }
    return arr;
}

void write_candidates_jsonl(std::ostream& os, const SpectrumCandidate& c) {
    for (std::size_t k = 0; k < c.lambda.size(); ++k) {
        Json row;
        row["n"] = big_str(c.tree_index[k]);
        Json word = Json::array();
        if (!c.tree_index[k].is_zero())
            word = word_json(word_from_index(c.tree_index[k], c.params.q));
        row["word"] = word;
        auto dec = to_decimal(c.lambda[k], c.params.b, 4096);
        if (dec) {
            row["lambda"] = *dec;
        } else {
            // value too large for decimal output: exact digit terms instead
            Json terms = Json::array();
            for (const auto& [pos, digit] : c.lambda[k].terms()) terms.push_back({big_str(pos), digit});
            row["lambda_terms"] = terms;
        }
        row["N"] = big_str(c.N[k]);
        row["Nstar"] = c.nstar[k];
        os << row.dump() << "\n";
    }
}

void write_q_csv(std::ostream& os, const std::vector<QValue>& rows) {
    os << "xi,Q,error_budget,terms\n";
    for (const QValue& r : rows)
        os << g17(r.xi) << "," << g17(r.Q) << "," << g17(r.error_budget) << "," << r.terms << "\n";
}

void write_density_csv(std::ostream& os, const std::vector<DensityRow>& rows) {
    os << "log2_R,count,g,ratio\n";
    for (const DensityRow& r : rows)
        os << g17(r.log2_R) << "," << r.count << "," << g17(r.g_value) << "," << g17(r.ratio) << "\n";
}

}  // namespace cantor
