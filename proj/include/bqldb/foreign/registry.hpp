#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bqldb/foreign/discriminative.hpp"
#include "bqldb/foreign/kepler.hpp"
#include "bqldb/foreign/predictor.hpp"

namespace bqldb::foreign {

// MODEL ... USING CUSTOM MODEL FROM <source> resolves against this built-in
// registry; external code files are never loaded. The source string is
// normalized (basename, lowercased, extension stripped) before matching.
inline std::string normalize_registry_key(const std::string& source) {
  std::string base = source;
  auto slash = base.find_last_of("/\\");
  if (slash != std::string::npos) base = base.substr(slash + 1);
  auto dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  for (char& c : base) c = char(std::tolower(static_cast<unsigned char>(c)));
  return base;
}

inline std::unique_ptr<ForeignPredictor> make_foreign(
    const std::string& source, const std::vector<StatType>& output_types,
    const std::vector<StatType>& input_types) {
  std::string key = normalize_registry_key(source);
  if (key.find("kepler") != std::string::npos) {
    if (output_types.size() != 2 || input_types.size() != 2)
      throw Error("kepler predictor models exactly 2 outputs given 2 inputs");
    for (const auto& t : output_types)
      if (t.kind != StatKind::numerical)
        throw Error("kepler predictor outputs must be numerical");
    return std::make_unique<KeplerPredictor>();
  }
  bool discriminative = key == "reference-discriminative" ||
                        key == "reference_discriminative" ||
                        key.find("regression") != std::string::npos ||
                        key.find("forest") != std::string::npos ||
                        key.find("discriminative") != std::string::npos;
  if (discriminative) {
    if (output_types.size() != 1)
      throw Error("reference discriminative predictor models exactly one output");
    return std::make_unique<ReferenceDiscriminative>(output_types[0], input_types);
  }
  throw Error("unknown foreign predictor '" + source +
              "' (registry: kepler, reference-discriminative)");
}

}  // namespace bqldb::foreign
