#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cantor/io.hpp"

using namespace cantor;

namespace {

std::string big_str(const BigInt& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("$: cannot open file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const std::exception& e) {
        throw SchemaError("$: invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

// Accepts either a bare mapping-spec document or a build wrapper {"spec": ...}.
TreeMappingSpec load_spec(const std::string& path) {
    Json j = load_json(path);
    if (j.is_object() && j.contains("spec")) return spec_from_json(j["spec"]);
    return spec_from_json(j);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write to '" + path + "'");
    out << text;
}

std::vector<BigInt> parse_radii(const std::string& csv) {
    std::vector<BigInt> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(BigInt(item));
        } catch (const std::exception&) {
            throw std::invalid_argument("radius '" + item + "' is not an integer");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"construct, audit and certify orthogonal exponential systems for "
                 "equal-weight digit measures"};
    app.require_subcommand(1);
    app.fallthrough();  // accept the global options after a subcommand too

    unsigned threads = 0;
    unsigned long long seed = 0;
    app.add_option("--threads", threads, "worker thread count (overrides CANTOR_SPECTRA_THREADS)");
    app.add_option("--seed", seed, "seed for randomized probe frequencies (default 0)");
    auto apply_globals = [&] {
        if (threads > 0) setenv("CANTOR_SPECTRA_THREADS", std::to_string(threads).c_str(), 1);
    };

    // ---- classify ----
    auto* cls = app.add_subcommand("classify", "orthogonality class of a parameter pair");
    int cls_q = 0, cls_b = 0;
    long long cls_window = 0;
    bool cls_stabilize = false;
    std::string cls_out;
    cls->add_option("--q", cls_q, "digit count q")->required();
    cls->add_option("--b", cls_b, "contraction base b")->required();
    cls->add_option("--search-window", cls_window, "run exact max-orthogonal search up to this frequency");
    cls->add_flag("--stabilize", cls_stabilize, "re-run the search at twice the window and compare sizes");
    cls->add_option("-o,--output", cls_out, "output file (default: stdout)");
    cls->callback([&] {
        apply_globals();
        Json out = classification_to_json(classify_qb(cls_q, cls_b));
        if (cls_window > 0) {
            OrthogonalSearch s = max_orthogonal_search(make_params(cls_q, cls_b), cls_window);
            Json sj;
            sj["window"] = s.window;
            sj["size"] = s.size;
            sj["vertices"] = s.vertices;
            sj["denominator"] = s.denominator;
            Json w = Json::array();
            for (const BigInt& k : s.witness) w.push_back(big_str(k));
            sj["witness_numerators"] = w;
            out["search"] = sj;
            if (cls_stabilize) {
                OrthogonalSearch s2 = max_orthogonal_search(make_params(cls_q, cls_b), 2 * cls_window);
                out["search_stable"] = {{"window", s2.window}, {"size", s2.size}, {"stable", s2.size == s.size}};
            }
        }
        write_text(cls_out, out.dump(2) + "\n");
    });

    // ---- build ----
    auto* bld = app.add_subcommand("build", "construct a mapping spec and validate it");
    std::string bld_kind, bld_growth = "log", bld_input, bld_out;
    int bld_q = 0, bld_b = 0, bld_depth = 6;
    double bld_eps = 1.0;
    bld->add_option("--kind", bld_kind, "canonical | sparse | slow | nonspectrum | custom")->required();
    bld->add_option("--q", bld_q, "digit count q");
    bld->add_option("--b", bld_b, "contraction base b");
    bld->add_option("--growth", bld_growth, "target growth for sparse: log | linear | sqrt | pow:a");
    bld->add_option("--epsilon", bld_eps, "tail-excess exponent for nonspectrum (default 1.0)");
    bld->add_option("--input", bld_input, "custom: mapping-spec JSON file to normalize");
    bld->add_option("--depth", bld_depth, "validation depth (default 6)");
    bld->add_option("-o,--output", bld_out, "output file (default: stdout)");
    bld->callback([&] {
        apply_globals();
        TreeMappingSpec spec;
        if (bld_kind == "custom") {
            if (bld_input.empty()) throw std::invalid_argument("--kind custom requires --input");
            spec = load_spec(bld_input);
        } else {
            if (bld_q == 0 || bld_b == 0) throw std::invalid_argument("--kind " + bld_kind + " requires --q and --b");
            MeasureParams p = make_params(bld_q, bld_b);
            if (bld_kind == "canonical") {
                spec = canonical_spec(p);
            } else if (bld_kind == "sparse") {
                spec = sparse_spec(p, GrowthSpec::parse(bld_growth));
            } else if (bld_kind == "slow") {
                spec = slow_growth_spec(p, compute_mask_constants(p));
            } else if (bld_kind == "nonspectrum") {
                spec = nonspectrum_spec(p, bld_eps, compute_mask_constants(p));
            } else {
                throw std::invalid_argument("unknown kind '" + bld_kind + "'");
            }
        }
        Json out;
        out["spec"] = spec_to_json(spec);
        out["validation"] = validation_to_json(validate(spec, bld_depth));
        if (spec.tail_rule.kind == TailRule::Kind::SparsePowers) {
            Json ms = Json::array();
            for (int n = 1; n <= 8; ++n) ms.push_back(big_str(sparse_m(spec, n)));
            out["m_seq_prefix"] = ms;
        }
        write_text(bld_out, out.dump(2) + "\n");
    });

    // ---- certify ----
    auto* cert = app.add_subcommand("certify", "run the full completeness-evidence pipeline");
    std::string cert_spec, cert_out, cert_emitq;
    CertifyConfig ccfg;
    bool cert_compare = false;
    long long cert_probes = 0;
    cert->add_option("--spec", cert_spec, "mapping-spec JSON file")->required();
    cert->add_option("--terms", ccfg.terms, "elements to sum (default 4096)");
    cert->add_option("--depth", ccfg.policy.depth, "mask factors per digit block (default 40)");
    cert->add_option("--tail-tol", ccfg.policy.tail_tol, "tail tolerance of the transform (default 1e-12)");
    cert->add_option("--q-tol", ccfg.q_tolerance, "grid closeness to 1 for the complete side (default 1e-3)");
    cert->add_option("--deficit-margin", ccfg.deficit_margin, "certified gap below 1 (default 0.01)");
    cert->add_option("--window", ccfg.maximality_window, "maximality window (default 200, 0 = skip)");
    cert->add_option("--prefix", ccfg.maximality_prefix, "maximality prefix length (default 64)");
    cert->add_option("--random-probes", cert_probes, "extra seeded probe frequencies in (0, 1/2]");
    cert->add_option("--emit-q", cert_emitq, "write the grid evaluations as CSV to this file");
    cert->add_flag("--compare-regularized", cert_compare, "also certify the regularized spec and compare");
    cert->add_option("-o,--output", cert_out, "output file (default: stdout)");
    cert->callback([&] {
        apply_globals();
        TreeMappingSpec spec = load_spec(cert_spec);
        ValidationReport vr = validate(spec, 4);
        for (const ValidationIssue& is : vr.issues)
            std::cerr << "warning: validation: " << is.node << ": " << is.message << "\n";
        if (cert_probes > 0) {
            ccfg.xi_grid = default_xi_grid();
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> uni(1e-3, 0.5);
            for (long long i = 0; i < cert_probes; ++i) ccfg.xi_grid.push_back(uni(rng));
        }
        Json out;
        const std::vector<QValue>* grid = nullptr;
        if (cert_compare) {
            RegularizedComparison rc = compare_regularized(spec, ccfg);
            out = comparison_to_json(rc);
            grid = &rc.base.grid;
            write_text(cert_out, out.dump(2) + "\n");
            if (!cert_emitq.empty()) {
                std::ostringstream csv;
                write_q_csv(csv, *grid);
                write_text(cert_emitq, csv.str());
            }
        } else {
            Verdict v = spectrum_verdict(spec, ccfg);
            out = verdict_to_json(v);
            write_text(cert_out, out.dump(2) + "\n");
            if (!cert_emitq.empty()) {
                std::ostringstream csv;
                write_q_csv(csv, v.grid);
                write_text(cert_emitq, csv.str());
            }
        }
    });

    // ---- density ----
    auto* den = app.add_subcommand("density", "sliding-window counting densities of the scaled set");
    std::string den_spec, den_growth = "log", den_radii, den_sweep, den_out;
    long long den_count = 4096;
    bool den_json = false;
    den->add_option("--spec", den_spec, "mapping-spec JSON file")->required();
    den->add_option("--growth", den_growth, "density target g: log | linear | sqrt | pow:a");
    den->add_option("--radii", den_radii, "comma-separated window radii (integers)");
    den->add_option("--sweep", den_sweep, "s1:s2 radii R = h^{-1}(b^s) for s in the range");
    den->add_option("--count", den_count, "elements to enumerate (default 4096)");
    den->add_flag("--json", den_json, "emit JSON instead of CSV");
    den->add_option("-o,--output", den_out, "output file (default: stdout)");
    den->callback([&] {
        apply_globals();
        TreeMappingSpec spec = load_spec(den_spec);
        GrowthSpec g = GrowthSpec::parse(den_growth);
        SpectrumCandidate c = enumerate_candidate(spec, den_count);
        std::vector<Expansion> radii;
        for (const BigInt& r : parse_radii(den_radii)) radii.push_back(expansion_from_int(r, spec.params.b));
        if (!den_sweep.empty()) {
            auto colon = den_sweep.find(':');
            if (colon == std::string::npos) throw std::invalid_argument("--sweep expects s1:s2");
            int s1 = std::stoi(den_sweep.substr(0, colon));
            int s2 = std::stoi(den_sweep.substr(colon + 1));
            for (int s = s1; s <= s2; ++s) radii.push_back(h_inverse_window(g, spec.params, s));
        }
        std::vector<DensityRow> rows = beurling_density(c, g, radii);
        if (den_json) {
            write_text(den_out, density_to_json(rows).dump(2) + "\n");
        } else {
            std::ostringstream csv;
            write_density_csv(csv, rows);
            write_text(den_out, csv.str());
        }
    });

    // ---- enumerate ----
    auto* enu = app.add_subcommand("enumerate", "list candidate elements as JSON lines");
    std::string enu_spec, enu_out;
    long long enu_count = 64;
    enu->add_option("--spec", enu_spec, "mapping-spec JSON file")->required();
    enu->add_option("--count", enu_count, "elements to enumerate (default 64)");
    enu->add_option("-o,--output", enu_out, "output file (default: stdout)");
    enu->callback([&] {
        apply_globals();
        TreeMappingSpec spec = load_spec(enu_spec);
        SpectrumCandidate c = enumerate_candidate(spec, enu_count);
        std::ostringstream os;
        write_candidates_jsonl(os, c);
        write_text(enu_out, os.str());
    });

    // ---- stats ----
    auto* sts = app.add_subcommand("stats", "per-level digit statistics of a candidate");
    std::string sts_spec, sts_out;
    long long sts_count = 4096;
    bool sts_criteria = false;
    sts->add_option("--spec", sts_spec, "mapping-spec JSON file")->required();
    sts->add_option("--count", sts_count, "elements to enumerate (default 4096)");
    sts->add_flag("--criteria", sts_criteria, "include the series-criteria report");
    sts->add_option("-o,--output", sts_out, "output file (default: stdout)");
    sts->callback([&] {
        apply_globals();
        TreeMappingSpec spec = load_spec(sts_spec);
        SpectrumCandidate c = enumerate_candidate(spec, sts_count);
        int level = 0;
        long long pw = 1;
        while (pw <= sts_count / spec.params.q) {
            pw *= spec.params.q;
            ++level;
        }
        DigitStats st = stats(c, level);
        Json out = stats_to_json(st);
        if (sts_criteria) {
            MaskConstants mc = compute_mask_constants(spec.params);
            CriterionConfig cc;
            cc.structural_sup_nstar = structural_sup_nstar(spec);
            out["criteria"] = criterion_to_json(criterion_report(st, mc, default_alpha(st, level), level, cc));
        }
        write_text(sts_out, out.dump(2) + "\n");
    });

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForVersion& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return 1;
        }
    } catch (const OrthogonalityFailure& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return 1;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 1;
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 2;
    } catch (const TruncationError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 2;
    } catch (const RefinementError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 2;
    } catch (const std::bad_alloc&) {
        std::cerr << "resource limit: out of memory\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
