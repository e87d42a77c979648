#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lrp/estimation.hpp"
#include "lrp/identities.hpp"
#include "lrp/model.hpp"
#include "lrp/renorm.hpp"
#include "lrp/solver.hpp"

namespace lrp {

using Json = nlohmann::json;

Json to_json(const LrpSample& sample);
LrpSample sample_from_json(const Json& doc);

/// Flow entries are emitted only when `with_flow` is set. An infinite
/// resistance is written as a null value.
Json to_json(const ResistanceResult& result, bool with_flow = false);

Json to_json(const Estimate& estimate);
Json to_json(const ExponentFit& fit);
Json to_json(const MultiplicativityRow& row);
Json to_json(const TypeComparison& types);
Json to_json(const ScalingReport& report);
Json to_json(const SuiteReport& report);
Json to_json(const CutPointStats& stats);

/// Byte-stable text: sorted keys, two-space indent, trailing newline.
std::string dump(const Json& doc);

/// CSV series for plotting: n,mean,ci_lo,ci_hi,std_error,series.
std::string series_csv(const ScalingReport& report);

inline constexpr std::string_view kClassificationHeader =
    "block_index,xi,eta,m_good,cond1,cond2,cond3,very_good,internal_energy";

/// One row per determinate block.
std::string classification_csv(std::span<const IntervalClassification> blocks);

/// Writes to a temporary file in the target directory, then renames it over
/// `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace lrp
