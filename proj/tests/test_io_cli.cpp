#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cantor/io.hpp"

using namespace cantor;
namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("cantor_io_cli." + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spill(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct CliResult {
    int status = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path o = work_dir() / ("stdout." + std::to_string(counter));
    fs::path e = work_dir() / ("stderr." + std::to_string(counter));
    ++counter;
    std::string cmd = std::string("\"") + CANTOR_CLI_EXE + "\" " + args + " > " + o.string() +
                      " 2> " + e.string();
    int rc = std::system(cmd.c_str());
    CliResult r;
    if (rc != -1 && WIFEXITED(rc)) r.status = WEXITSTATUS(rc);
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
}

std::vector<std::string> keys_of(const Json& j) {
    std::vector<std::string> k;
    for (const auto& item : j.items()) k.push_back(item.key());
    return k;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

std::string schema_message(const Json& j) {
    try {
        spec_from_json(j);
    } catch (const SchemaError& e) {
        return e.what();
    }
    return "";
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

bool contains(const std::string& s, const std::string& needle) {
    return s.find(needle) != std::string::npos;
}

// Spec files shared by the subprocess cases, written once from in-process builders.
const fs::path& canonical_spec_file() {
    static const fs::path p = [] {
        fs::path f = work_dir() / "canonical24.json";
        spill(f, spec_to_json(canonical_spec(make_params(2, 4))).dump(2) + "\n");
        return f;
    }();
    return p;
}

const fs::path& sparse_spec_file() {
    static const fs::path p = [] {
        fs::path f = work_dir() / "sparse24.json";
        spill(f, spec_to_json(sparse_spec(make_params(2, 4), GrowthSpec::parse("log"))).dump(2) + "\n");
        return f;
    }();
    return p;
}

const Verdict& small_canonical_verdict() {
    static const Verdict v = [] {
        CertifyConfig cfg;
        cfg.terms = 256;
        cfg.maximality_window = 50;
        cfg.maximality_prefix = 16;
        return spectrum_verdict(canonical_spec(make_params(2, 4)), cfg);
    }();
    return v;
}

}  // namespace

TEST_CASE("mapping-spec documents round-trip through JSON bit-for-bit") {
    MeasureParams p24 = make_params(2, 4);
    MeasureParams p36 = make_params(3, 6);
    MaskConstants mc24 = compute_mask_constants(p24);

    std::vector<TreeMappingSpec> specs = {
        canonical_spec(p24),
        canonical_spec(p36),
        sparse_spec(p24, GrowthSpec::parse("log")),
        sparse_spec(p36, GrowthSpec::parse("linear")),
        slow_growth_spec(p24, mc24),
        nonspectrum_spec(p24, 1.0, mc24),
    };
    const std::vector<std::string> top_keys = {"q",         "b",         "label",
                                               "base_residues", "tail_rule", "overrides",
                                               "irregular_paths", "zero_tail_stems"};
    for (const TreeMappingSpec& s : specs) {
        Json j = spec_to_json(s);
        CHECK(keys_of(j) == top_keys);
        TreeMappingSpec back = spec_from_json(j);
        Json j2 = spec_to_json(back);
        CHECK(j == j2);
        CHECK(j.dump() == j2.dump());
    }
}

TEST_CASE("hand-written rules, overrides and irregular paths survive a round-trip") {
    TreeMappingSpec s;
    s.params = make_params(2, 4);
    s.base_residues = {0, 1};
    s.label = "hand-built";
    s.tail_rule.kind = TailRule::Kind::Custom;
    s.tail_rule.custom[Word{1}] = {{BigInt(2), 2}, {BigInt(5), 0}};
    s.tail_rule.custom[Word{1, 1}] = {{BigInt("123456789012345678901234567890"), 2}};
    s.overrides[Word{0, 1}] = 2;
    s.irregular.push_back(IrregularPath{Word{1}, 2});
    s.zero_tail_stems.push_back(Word{1, 0, 1});

    Json j = spec_to_json(s);
    CHECK(j["tail_rule"]["kind"] == "custom");
    REQUIRE(j["tail_rule"]["table"].size() == 3);
    CHECK(j["tail_rule"]["table"][0]["word"] == Json::array({1}));
    CHECK(j["tail_rule"]["table"][0]["level"] == "2");
    CHECK(j["tail_rule"]["table"][0]["digit"] == 2);
    CHECK(j["tail_rule"]["table"][1]["level"] == "5");
    CHECK(j["tail_rule"]["table"][2]["word"] == Json::array({1, 1}));
    CHECK(j["tail_rule"]["table"][2]["level"] == "123456789012345678901234567890");
    REQUIRE(j["overrides"].size() == 1);
    CHECK(j["overrides"][0]["word"] == Json::array({0, 1}));
    CHECK(j["overrides"][0]["digit"] == 2);
    REQUIRE(j["irregular_paths"].size() == 1);
    CHECK(j["irregular_paths"][0]["stem"] == Json::array({1}));
    CHECK(j["irregular_paths"][0]["tail_digit"] == 2);
    CHECK(j["zero_tail_stems"] == Json::array({Json::array({1, 0, 1})}));

    TreeMappingSpec back = spec_from_json(j);
    CHECK(spec_to_json(back) == j);
    CHECK(back.tail_rule.custom.at(Word{1, 1})[0].first == BigInt("123456789012345678901234567890"));
    CHECK(back.overrides.at(Word{0, 1}) == 2);
    CHECK(back.irregular.size() == 1);
    CHECK(back.zero_tail_stems == std::vector<Word>{Word{1, 0, 1}});
}

TEST_CASE("integer fields accept and emit arbitrary-precision decimal strings") {
    TreeMappingSpec s;
    s.params = make_params(2, 4);
    s.base_residues = {0, 1};
    s.label = "explicit-positions";
    s.tail_rule.kind = TailRule::Kind::SparsePowers;
    s.tail_rule.digit = 2;
    s.tail_rule.m_seq = {BigInt(9), BigInt(33), BigInt("100000000000000000000000000000000000007")};

    Json j = spec_to_json(s);
    REQUIRE(j["tail_rule"]["m_seq"].size() == 3);
    CHECK(j["tail_rule"]["m_seq"][0] == "9");
    CHECK(j["tail_rule"]["m_seq"][2] == "100000000000000000000000000000000000007");

    TreeMappingSpec back = spec_from_json(j);
    CHECK(back.tail_rule.m_seq.size() == 3);
    CHECK(back.tail_rule.m_seq[2] == BigInt("100000000000000000000000000000000000007"));
    CHECK(spec_to_json(back) == j);

    // Small integers may also arrive as plain JSON numbers.
    Json j2 = j;
    j2["tail_rule"]["m_seq"][0] = 9;
    CHECK(spec_from_json(j2).tail_rule.m_seq[0] == BigInt(9));
}

TEST_CASE("malformed mapping-spec documents are rejected with precise paths") {
    const Json base = spec_to_json(canonical_spec(make_params(2, 4)));

    CHECK(starts_with(schema_message(Json::array()), "$: expected an object"));

    Json no_q = base;
    no_q.erase("q");
    CHECK(schema_message(no_q) == "$: missing key 'q'");

    Json extra = base;
    extra["bogus"] = 1;
    CHECK(schema_message(extra) == "$.bogus: unexpected key");

    Json bad_q = base;
    bad_q["q"] = "two";
    CHECK(starts_with(schema_message(bad_q), "$.q: expected an integer"));

    Json bad_res = base;
    bad_res["base_residues"] = Json::array({0});
    CHECK(schema_message(bad_res) == "$.base_residues: expected exactly q = 2 entries");

    Json bad_kind = base;
    bad_kind["tail_rule"]["kind"] = "mystery";
    CHECK(schema_message(bad_kind) == "$.tail_rule.kind: unknown kind 'mystery'");

    Json dup_override = base;
    Json row;
    row["word"] = Json::array({1});
    row["digit"] = 1;
    dup_override["overrides"].push_back(row);
    dup_override["overrides"].push_back(row);
    CHECK(schema_message(dup_override) == "$.overrides[1].word: duplicate override word");

    Json dup_level = base;
    Json entry;
    entry["word"] = Json::array({1});
    entry["level"] = "3";
    entry["digit"] = 0;
    dup_level["tail_rule"] = Json{{"kind", "custom"}, {"table", Json::array({entry, entry})}};
    CHECK(schema_message(dup_level) == "$.tail_rule.table[1].level: duplicate level for this word");

    Json no_positions = base;
    no_positions["tail_rule"] = Json{{"kind", "sparse_powers"}, {"digit", 2}};
    CHECK(schema_message(no_positions) ==
          "$.tail_rule: sparse_powers needs 'growth' or a nonempty 'm_seq'");
}

TEST_CASE("verdict reports serialize with a stable key layout") {
    const Verdict& v = small_canonical_verdict();
    Json j = verdict_to_json(v);

    const std::vector<std::string> expected = {
        "kind",     "label",    "q",        "b",        "numerical_only",
        "terms",    "policy",   "constants", "criteria", "grid",
        "worst_abs_dev", "identity", "remaining_mass", "maximality", "explanation"};
    CHECK(keys_of(j) == expected);

    CHECK(j["q"] == 2);
    CHECK(j["b"] == 4);
    CHECK(j["kind"] == "spectrum-numeric");
    CHECK(j["terms"] == 256);
    CHECK(keys_of(j["policy"]) == std::vector<std::string>{"depth", "tail_tol"});
    CHECK(keys_of(j["constants"]) == std::vector<std::string>{"c_min", "c_max", "resolution"});
    CHECK(j["constants"]["c_min"].size() == 2);
    CHECK(keys_of(j["criteria"]) ==
          std::vector<std::string>{"c1_interval", "c2_interval", "alpha", "gaps",
                                   "window_exponents", "partial_sums_divergence",
                                   "level_exponents", "level_terms",
                                   "partial_sums_convergence", "horizon", "conclusion",
                                   "detail"});
    REQUIRE(j["grid"].size() == 34);
    CHECK(keys_of(j["grid"][0]) == std::vector<std::string>{"xi", "Q", "error_budget", "terms"});
    CHECK(j["worst_abs_dev"].is_number());
    CHECK(keys_of(j["identity"]) == std::vector<std::string>{"level", "max_abs_dev"});
    CHECK(j["identity"]["level"].get<int>() > 0);
    CHECK(j["identity"]["max_abs_dev"].get<double>() < 1e-9);
    CHECK(keys_of(j["remaining_mass"]) ==
          std::vector<std::string>{"bound", "verified_levels", "assumed_increment", "level_ratio",
                                   "assumption"});
    // An unbounded remainder serializes as null, never as inf/nan (invalid JSON).
    CHECK(j["remaining_mass"]["bound"].is_null());
    CHECK(keys_of(j["maximality"]) == std::vector<std::string>{"window", "prefix", "survivors"});
    CHECK(j["maximality"]["survivors"].empty());
    CHECK(!j.contains("deficit"));

    // Incomplete systems additionally carry the witness block.
    CertifyConfig cfg;
    cfg.terms = 1024;
    cfg.maximality_window = 0;
    cfg.xi_grid = {0.5};
    Verdict nv = spectrum_verdict(
        nonspectrum_spec(make_params(2, 4), 1.0, compute_mask_constants(make_params(2, 4))), cfg);
    Json nj = verdict_to_json(nv);
    CHECK(nj["kind"] == "not-spectrum-numeric");
    REQUIRE(nj.contains("deficit"));
    CHECK(keys_of(nj["deficit"]) ==
          std::vector<std::string>{"xi0", "Q", "error_budget", "total_upper_bound"});
    CHECK(nj["deficit"]["xi0"] == 0.5);
    CHECK(nj["deficit"]["total_upper_bound"].get<double>() < 1.0);
    CHECK(nj["remaining_mass"]["bound"].is_number());

    RegularizedComparison rc;
    rc.base = v;
    rc.regularized = v;
    rc.agree = true;
    CHECK(keys_of(comparison_to_json(rc)) ==
          std::vector<std::string>{"base", "regularized", "agree"});
}

TEST_CASE("candidate lists write as parseable JSON lines") {
    SpectrumCandidate c = enumerate_candidate(canonical_spec(make_params(2, 4)), 4);
    std::ostringstream os;
    write_candidates_jsonl(os, c);
    std::vector<std::string> lines = split_lines(os.str());
    REQUIRE(lines.size() == 4);

    std::vector<Json> rows;
    for (const std::string& line : lines) rows.push_back(Json::parse(line));
    for (const Json& r : rows)
        CHECK(keys_of(r) == std::vector<std::string>{"n", "word", "lambda", "N", "Nstar"});

    CHECK(rows[0]["n"] == "0");
    CHECK(rows[0]["word"] == Json::array());
    CHECK(rows[0]["lambda"] == "0");
    CHECK(rows[0]["N"] == "0");
    CHECK(rows[0]["Nstar"] == 0);
    CHECK(rows[1]["word"] == Json::array({1}));
    CHECK(rows[1]["lambda"] == "1");
    CHECK(rows[1]["N"] == "1");
    CHECK(rows[2]["word"] == Json::array({0, 1}));
    CHECK(rows[2]["lambda"] == "4");
    CHECK(rows[3]["lambda"] == "5");
    CHECK(rows[3]["N"] == "2");

    // Values too large for decimal output fall back to exact digit terms.
    TreeMappingSpec huge;
    huge.params = make_params(2, 4);
    huge.base_residues = {0, 1};
    huge.label = "huge-positions";
    huge.tail_rule.kind = TailRule::Kind::SparsePowers;
    huge.tail_rule.digit = 2;
    huge.tail_rule.m_seq = {BigInt(20000)};
    SpectrumCandidate hc = enumerate_candidate(huge, 2);
    std::ostringstream hs;
    write_candidates_jsonl(hs, hc);
    std::vector<std::string> hlines = split_lines(hs.str());
    REQUIRE(hlines.size() == 2);
    Json big = Json::parse(hlines[1]);
    CHECK(!big.contains("lambda"));
    REQUIRE(big.contains("lambda_terms"));
    REQUIRE(big["lambda_terms"].size() == 2);
    CHECK(big["lambda_terms"][0] == Json::array({"0", 1}));
    CHECK(big["lambda_terms"][1] == Json::array({"20000", 2}));
    CHECK(big["N"] == "20001");
    CHECK(big["Nstar"] == 1);
}

TEST_CASE("grid and density tables write as 17-digit CSV") {
    std::vector<QValue> qrows(2);
    qrows[0].xi = 1.0 / 3.0;
    qrows[0].Q = 0.98765432109876543;
    qrows[0].error_budget = 1.25e-9;
    qrows[0].terms = 512;
    qrows[1].xi = 0.5;
    qrows[1].Q = 1.0;
    qrows[1].error_budget = 0.0;
    qrows[1].terms = 4096;

    std::ostringstream qs;
    write_q_csv(qs, qrows);
    std::vector<std::string> qlines = split_lines(qs.str());
    REQUIRE(qlines.size() == 3);
    CHECK(qlines[0] == "xi,Q,error_budget,terms");
    std::vector<std::string> cells = split_csv(qlines[1]);
    REQUIRE(cells.size() == 4);
    CHECK(std::strtod(cells[0].c_str(), nullptr) == qrows[0].xi);
    CHECK(std::strtod(cells[1].c_str(), nullptr) == qrows[0].Q);
    CHECK(std::strtod(cells[2].c_str(), nullptr) == qrows[0].error_budget);
    CHECK(cells[3] == "512");

    std::vector<DensityRow> drows(1);
    drows[0].log2_R = 15.999977986052736;
    drows[0].count = 3;
    drows[0].g_value = 256.0;
    drows[0].ratio = 3.0 / 256.0;
    std::ostringstream ds;
    write_density_csv(ds, drows);
    std::vector<std::string> dlines = split_lines(ds.str());
    REQUIRE(dlines.size() == 2);
    CHECK(dlines[0] == "log2_R,count,g,ratio");
    std::vector<std::string> dcells = split_csv(dlines[1]);
    REQUIRE(dcells.size() == 4);
    CHECK(std::strtod(dcells[0].c_str(), nullptr) == drows[0].log2_R);
    CHECK(dcells[1] == "3");
    CHECK(std::strtod(dcells[2].c_str(), nullptr) == 256.0);
    CHECK(std::strtod(dcells[3].c_str(), nullptr) == drows[0].ratio);

    Json dj = density_to_json(drows);
    REQUIRE(dj.is_array());
    REQUIRE(dj.size() == 1);
    CHECK(keys_of(dj[0]) == std::vector<std::string>{"log2_R", "count", "g", "ratio"});
    CHECK(dj[0]["count"] == 3);
}

TEST_CASE("classification, validation and stats reports serialize faithfully") {
    Json cj = classification_to_json(classify_qb(2, 4));
    CHECK(keys_of(cj) == std::vector<std::string>{"q", "b", "gcd", "kind", "unknown_spectrality",
                                                  "hadamard", "note"});
    CHECK(cj["kind"] == "spectral-by-construction");
    CHECK(cj["hadamard"] == true);
    CHECK(cj["unknown_spectrality"] == false);
    CHECK(classification_to_json(classify_qb(3, 5))["kind"] ==
          "at-most-finitely-many-exponentials");
    Json cj46 = classification_to_json(classify_qb(4, 6));
    CHECK(cj46["kind"] == "infinitely-many-orthogonal");
    CHECK(cj46["gcd"] == 2);
    CHECK(cj46["unknown_spectrality"] == true);

    TreeMappingSpec spec = canonical_spec(make_params(2, 4));
    Json vj = validation_to_json(validate(spec, 4));
    CHECK(keys_of(vj) == std::vector<std::string>{"ok", "issues"});
    CHECK(vj["ok"] == true);
    CHECK(vj["issues"].empty());

    TreeMappingSpec broken = spec;
    broken.overrides[Word{1}] = 2;  // 2 is not in the residue class of letter 1 mod 2
    Json bj = validation_to_json(validate(broken, 4));
    CHECK(bj["ok"] == false);
    REQUIRE(!bj["issues"].empty());
    CHECK(keys_of(bj["issues"][0]) == std::vector<std::string>{"node", "message"});
    CHECK(contains(bj["issues"][0]["node"].get<std::string>(), "1"));

    SpectrumCandidate c = enumerate_candidate(spec, 64);
    Json sj = stats_to_json(stats(c, 5));
    CHECK(keys_of(sj) ==
          std::vector<std::string>{"q", "levels", "max_N", "max_Nstar", "min_Nstar"});
    CHECK(sj["q"] == 2);
    CHECK(sj["levels"] == 5);
    CHECK(sj["max_N"].is_array());
    CHECK(sj["max_N"].size() == 5);
    CHECK(sj["max_Nstar"].size() == 5);

    std::vector<BigInt> scaled;
    for (const Expansion& l : c.lambda) {
        auto d = to_decimal(l, 4, 64);
        REQUIRE(d);
        scaled.push_back(BigInt(*d) * 2);
    }
    scaled.resize(8);
    Json rj = reconstruction_to_json(mapping_from_set(scaled, make_params(2, 4), 3));
    CHECK(keys_of(rj) == std::vector<std::string>{"ok", "assignments", "undetermined",
                                                  "violations"});
    CHECK(rj["ok"] == true);
    REQUIRE(!rj["assignments"].empty());
    CHECK(keys_of(rj["assignments"][0]) == std::vector<std::string>{"word", "digit"});
}

TEST_CASE("CLI: classify reports the class and exact search results") {
    CliResult r = run_cli("classify --q 3 --b 5 --search-window 500 --stabilize");
    REQUIRE(r.status == 0);
    CHECK(r.err.empty());
    Json j = Json::parse(r.out);
    CHECK(j["kind"] == "at-most-finitely-many-exponentials");
    CHECK(j["gcd"] == 1);
    CHECK(j["hadamard"] == false);
    REQUIRE(j.contains("search"));
    CHECK(j["search"]["window"] == 500);
    CHECK(j["search"]["size"] == 3);
    CHECK(j["search"]["vertices"] == 400);
    CHECK(j["search"]["denominator"] == 3);
    CHECK(j["search"]["witness_numerators"] == Json::array({"-1495", "0", "1495"}));
    REQUIRE(j.contains("search_stable"));
    CHECK(j["search_stable"]["window"] == 1000);
    CHECK(j["search_stable"]["stable"] == true);

    CliResult r2 = run_cli("classify --q 2 --b 4");
    REQUIRE(r2.status == 0);
    Json j2 = Json::parse(r2.out);
    CHECK(j2["kind"] == "spectral-by-construction");
    CHECK(j2["hadamard"] == true);
    CHECK(!j2.contains("search"));
}

TEST_CASE("CLI: build emits a validated spec wrapper that certify can consume") {
    fs::path wrapper = work_dir() / "built_canonical.json";
    CliResult r = run_cli("build --kind canonical --q 2 --b 4 -o " + wrapper.string());
    REQUIRE(r.status == 0);
    CHECK(r.err.empty());
    Json j = Json::parse(slurp(wrapper));
    REQUIRE(j.contains("spec"));
    REQUIRE(j.contains("validation"));
    CHECK(!j.contains("m_seq_prefix"));
    CHECK(j["validation"]["ok"] == true);
    CHECK(j["spec"] == spec_to_json(canonical_spec(make_params(2, 4))));

    fs::path sparse_wrapper = work_dir() / "built_sparse.json";
    CliResult rs = run_cli("build --kind sparse --q 2 --b 4 --growth log -o " +
                           sparse_wrapper.string());
    REQUIRE(rs.status == 0);
    Json js = Json::parse(slurp(sparse_wrapper));
    CHECK(js["validation"]["ok"] == true);
    CHECK(js["m_seq_prefix"] ==
          Json::array({"9", "33", "129", "513", "2049", "8193", "32769", "131073"}));

    // Normalizing a bare custom document through build preserves it exactly.
    fs::path custom_in = work_dir() / "custom_in.json";
    Json c = spec_to_json(canonical_spec(make_params(3, 6)));
    spill(custom_in, c.dump() + "\n");
    CliResult rc = run_cli("build --kind custom --input " + custom_in.string());
    REQUIRE(rc.status == 0);
    CHECK(Json::parse(rc.out)["spec"] == c);

    // The wrapper (not just a bare spec) is accepted anywhere a spec is.
    fs::path vout = work_dir() / "verdict_from_wrapper.json";
    fs::path qcsv = work_dir() / "grid_from_wrapper.csv";
    CliResult rv = run_cli("certify --spec " + wrapper.string() +
                           " --terms 256 --window 50 --prefix 16 --emit-q " + qcsv.string() +
                           " -o " + vout.string());
    REQUIRE(rv.status == 0);
    CHECK(rv.err.empty());
    Json v = Json::parse(slurp(vout));
    CHECK(v["kind"] == "spectrum-numeric");
    CHECK(v["terms"] == 256);
    REQUIRE(v["grid"].size() == 34);

    std::vector<std::string> csv = split_lines(slurp(qcsv));
    REQUIRE(csv.size() == 35);
    CHECK(csv[0] == "xi,Q,error_budget,terms");
    std::vector<std::string> first = split_csv(csv[1]);
    REQUIRE(first.size() == 4);
    CHECK(std::strtod(first[0].c_str(), nullptr) == v["grid"][0]["xi"].get<double>());
    CHECK(std::strtod(first[1].c_str(), nullptr) == v["grid"][0]["Q"].get<double>());
}

TEST_CASE("CLI: bad inputs exit 1 with a diagnostic") {
    fs::path bad_doc = work_dir() / "bad_doc.json";
    Json b = spec_to_json(canonical_spec(make_params(2, 4)));
    b["bogus"] = 1;
    spill(bad_doc, b.dump() + "\n");
    CliResult r = run_cli("build --kind custom --input " + bad_doc.string());
    CHECK(r.status == 1);
    CHECK(contains(r.err, "$.bogus"));

    CliResult r2 = run_cli("build --kind bogus --q 2 --b 4");
    CHECK(r2.status == 1);
    CHECK(contains(r2.err, "unknown kind"));

    CliResult r3 = run_cli("build --kind sparse --q 2 --b 4 --growth nonsense");
    CHECK(r3.status == 1);
    CHECK(contains(r3.err, "nonsense"));

    fs::path corrupt = work_dir() / "corrupt.json";
    TreeMappingSpec cs = canonical_spec(make_params(2, 4));
    cs.overrides[Word{1}] = 2;
    spill(corrupt, spec_to_json(cs).dump() + "\n");
    CliResult r4 = run_cli("certify --spec " + corrupt.string() + " --terms 64 --window 0");
    CHECK(r4.status == 1);
    CHECK(contains(r4.err, "pairwise orthogonality failed"));

    CliResult r5 = run_cli("classify --q 3");
    CHECK(r5.status == 1);

    CliResult r6 = run_cli("");
    CHECK(r6.status == 1);

    CliResult r7 = run_cli("density --spec " + canonical_spec_file().string() + " --sweep 2-4");
    CHECK(r7.status == 1);
    CHECK(contains(r7.err, "s1:s2"));

    CliResult r8 = run_cli("certify --spec " + (work_dir() / "missing.json").string());
    CHECK(r8.status == 1);
    CHECK(contains(r8.err, "cannot open"));

    fs::path not_json = work_dir() / "not_json.json";
    spill(not_json, "{这 is not json");
    CliResult r9 = run_cli("enumerate --spec " + not_json.string());
    CHECK(r9.status == 1);
    CHECK(contains(r9.err, "invalid JSON"));
}

TEST_CASE("CLI: resource overruns exit 2") {
    CliResult r = run_cli("enumerate --spec " + canonical_spec_file().string() +
                          " --count 2000000");
    CHECK(r.status == 2);
    CHECK(contains(r.err, "budget"));

    CliResult r2 = run_cli("build --kind canonical --q 2 --b 4 --depth 25");
    CHECK(r2.status == 2);
    CHECK(contains(r2.err, "too large"));
}

TEST_CASE("CLI: density sweeps and enumeration produce tabular output") {
    CliResult r = run_cli("density --spec " + sparse_spec_file().string() +
                          " --sweep 2:4 --count 16");
    REQUIRE(r.status == 0);
    std::vector<std::string> lines = split_lines(r.out);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "log2_R,count,g,ratio");
    const double expected_log2[3] = {16.0, 64.0, 256.0};
    for (int s = 2; s <= 4; ++s) {
        std::vector<std::string> cells = split_csv(lines[s - 1]);
        REQUIRE(cells.size() == 4);
        double log2_R = std::strtod(cells[0].c_str(), nullptr);
        CHECK(log2_R == doctest::Approx(expected_log2[s - 2]).epsilon(1e-3));
        CHECK(cells[1] == std::to_string(s - 1));
        double g = std::strtod(cells[2].c_str(), nullptr);
        CHECK(g == doctest::Approx(std::pow(4.0, s)).epsilon(1e-9));
        double ratio = std::strtod(cells[3].c_str(), nullptr);
        CHECK(ratio == doctest::Approx((s - 1.0) / std::pow(4.0, s)).epsilon(1e-9));
    }

    CliResult r2 = run_cli("density --spec " + sparse_spec_file().string() + " --count 16");
    REQUIRE(r2.status == 0);
    CHECK(r2.out == "log2_R,count,g,ratio\n");

    CliResult r3 = run_cli("density --spec " + canonical_spec_file().string() +
                           " --radii 3 --count 4096 --json");
    REQUIRE(r3.status == 0);
    Json dj = Json::parse(r3.out);
    REQUIRE(dj.size() == 1);
    CHECK(dj[0]["count"] == 2);
    CHECK(dj[0]["ratio"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

    CliResult r4 = run_cli("enumerate --spec " + canonical_spec_file().string() + " --count 4");
    REQUIRE(r4.status == 0);
    std::vector<std::string> rows = split_lines(r4.out);
    REQUIRE(rows.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(Json::parse(rows[i])["n"] == std::to_string(i));
    CHECK(Json::parse(rows[3])["lambda"] == "5");

    CliResult r5 = run_cli("stats --spec " + canonical_spec_file().string() +
                           " --count 64 --criteria");
    REQUIRE(r5.status == 0);
    Json sj = Json::parse(r5.out);
    CHECK(sj["q"] == 2);
    CHECK(sj["levels"] == 6);
    CHECK(sj["max_N"].size() == 6);
    CHECK(sj["max_Nstar"] == Json::array({0, 0, 0, 0, 0, 0}));
    CHECK(sj["min_Nstar"] == Json::array({0, 0, 0, 0, 0, 0}));
    REQUIRE(sj.contains("criteria"));
    CHECK(sj["criteria"]["conclusion"] == "satisfies-divergence-criterion");
}

TEST_CASE("CLI: reruns are byte-identical across seeds and thread counts") {
    std::string base = "certify --spec " + sparse_spec_file().string() +
                       " --terms 256 --window 0 --seed 5 --random-probes 3 -o ";
    fs::path a = work_dir() / "seeded_a.json";
    fs::path b = work_dir() / "seeded_b.json";
    REQUIRE(run_cli(base + a.string()).status == 0);
    REQUIRE(run_cli(base + b.string()).status == 0);
    std::string ta = slurp(a), tb = slurp(b);
    REQUIRE(!ta.empty());
    CHECK(ta == tb);
    CHECK(Json::parse(ta)["grid"].size() == 37);  // 34 default points + 3 seeded probes

    fs::path t1 = work_dir() / "threads_1.json";
    fs::path t3 = work_dir() / "threads_3.json";
    std::string tcmd = "certify --spec " + canonical_spec_file().string() +
                       " --terms 512 --window 25 --prefix 8";
    REQUIRE(run_cli(tcmd + " --threads 1 -o " + t1.string()).status == 0);
    REQUIRE(run_cli(tcmd + " --threads 3 -o " + t3.string()).status == 0);
    std::string x1 = slurp(t1), x3 = slurp(t3);
    REQUIRE(!x1.empty());
    CHECK(x1 == x3);
}
