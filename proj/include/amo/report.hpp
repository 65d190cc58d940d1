#pragma once

#include <string>

#include <json.hpp>

#include "amo/cf_engine.hpp"
#include "amo/greens.hpp"
#include "amo/localization.hpp"
#include "amo/resonance.hpp"

namespace amo {

using Json = nlohmann::ordered_json;

inline constexpr const char* kArtifactName = "amolab";
inline constexpr const char* kArtifactVersion = "1.0.0";

/// Serializes with every floating value written as %.17g; non-finite values become null.
std::string dump17(const Json& j, int indent = 2);

Json artifact_json();

Json to_json(const LogScalar& v);
Json to_json(const IntervalZ& box);
/// Convergents, Delta_n bracket checks, beta sequence, best-denominator scans
/// up to the brute-force cap.
Json frequency_report(const FrequencyModel& model, std::size_t beta_window = 0, Int brute_force_cap = 100'000);
Json to_json(const RegularityVerdict& v);
Json to_json(const ResonanceReport& r);
Json to_json(const PhaseSet& set);
Json to_json(const UniformityReport& u);
Json to_json(const ReferenceMargins& m);
Json to_json(const RateSummary& s);
Json to_json(const TheoremVerdict& v);
Json to_json(const FilterCheck& f);

/// Header plus one row per mode: mode_index,energy,center,c,r2,fit_points,selected.
std::string modes_csv(const TheoremVerdict& v);

/// %.17g.
std::string format17(double x);

}  // namespace amo
