#pragma once

// JSON encoding of certificates and reports. Complex entries are [re, im]
// pairs; floats are written with 17 significant digits so that identical
// inputs give identical bytes.

#include <exception>
#include <string>

#include <json.hpp>

#include "opfam/polarized.hpp"
#include "opfam/spectral_flow.hpp"

namespace opfam {

using Json = nlohmann::json;

/// %.17g, with "Infinity", "-Infinity" and "NaN" for non-finite values.
std::string format_double(double v);

/// Compact, key-sorted JSON text with format_double for every float.
std::string dump_canonical(const Json& j, int indent = 2);

Json matrix_to_json(const Matrix& m);
Json vector_to_json(const RealVector& v);
Json range_to_json(const FamilySample& sample, GridRange r);

Json to_json(const AdaptedPairCertificate& c, const FamilySample& sample);
Json to_json(const Violation& v);
Json to_json(const CoveringCertificate& c, const FamilySample& sample);
Json to_json(const DiscreteSpectrumReport& r);
Json to_json(const ContinuityModulus& m);
Json to_json(const Theorem1Certificate& c, const FamilySample& sample);
Json to_json(const StrictAdaptedness& s);
Json to_json(const Theorem2Certificate& c, const FamilySample& sample);
Json to_json(const FlowResult& f, const FamilySample& sample);
Json to_json(const PolarizationResult& p);
Json to_json(const WeakDiscreteSpectrumReport& r);
Json to_json(const CorrespondenceReport& r);
Json to_json(const TruncationReport& r);
Json to_json(const SignCheckReport& r);

/// {"type": ..., "message": ..., plus the typed fields of library errors}.
Json error_to_json(const std::exception& e);

}  // namespace opfam
