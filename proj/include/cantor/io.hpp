#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cantor/certify.hpp"
#include "cantor/treemap.hpp"

namespace cantor {

using Json = nlohmann::ordered_json;

/** Input document violates the expected shape; message names the node path. */
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Mapping-spec document:
 * {
 *   "q": int, "b": int, "label": string?,
 *   "base_residues": [int, ...],
 *   "tail_rule": { "kind": "all_zero" | "sparse_powers" | "length_ramp"
 *                        | "index_loglog" | "custom", ... },
 *   "overrides": [{"word": [int,...], "digit": int}, ...],
 *   "irregular_paths": [{"stem": [int,...], "tail_digit": int}, ...],
 *   "zero_tail_stems": [[int,...], ...]
 * }
 * Integer positions that may exceed native range (sparse m_seq, custom
 * levels) are written as decimal strings and accepted as either numbers or
 * strings.  Unknown keys raise SchemaError with the offending path.
 */
Json spec_to_json(const TreeMappingSpec& spec);
TreeMappingSpec spec_from_json(const Json& j);

Json validation_to_json(const ValidationReport& r);
Json classification_to_json(const Classification& c);
Json criterion_to_json(const CriterionReport& r);
Json verdict_to_json(const Verdict& v);
Json comparison_to_json(const RegularizedComparison& rc);
Json reconstruction_to_json(const Reconstruction& r);
Json stats_to_json(const DigitStats& s);
Json density_to_json(const std::vector<DensityRow>& rows);

/** One line per element: {"n":..,"word":[..],"lambda":"..","N":..,"Nstar":..}. */
void write_candidates_jsonl(std::ostream& os, const SpectrumCandidate& c);

/** CSV "xi,Q,error_budget,terms", %.17g floats. */
void write_q_csv(std::ostream& os, const std::vector<QValue>& rows);

/** CSV "log2_R,count,g,ratio", %.17g floats. */
void write_density_csv(std::ostream& os, const std::vector<DensityRow>& rows);

}  // namespace cantor
