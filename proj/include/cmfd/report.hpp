#ifndef CMFD_REPORT_HPP
#define CMFD_REPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cmfd/errors.hpp"
#include "cmfd/geometry.hpp"
#include "cmfd/image.hpp"
#include "json.hpp"

namespace cmfd {

enum class Method { rescale, exact, dct };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::rescale:
      return "rescale";
    case Method::exact:
      return "exact";
    case Method::dct:
      return "dct";
  }
  return "unknown";
}

enum class MatchKind { block, region };

// One detected duplication: a source rectangle, the destination it was
// copied to, and a method-dependent score (intensity offset, block distance,
// or scale factor).
struct MatchPair {
  Rect source;
  Rect dest;
  double score = 0.0;
  MatchKind kind = MatchKind::block;
};

struct DetectionReport {
  Method method = Method::exact;
  nlohmann::json params;  // effective config; replaying it reproduces the run
  std::vector<MatchPair> matches;
  std::string mask_path;
  std::int64_t elapsed_ms = 0;

  bool forgery_detected() const { return !matches.empty(); }
};

inline nlohmann::json to_json(const Rect& r) {
  return {{"row", r.row},
          {"col", r.col},
          {"height", r.height},
          {"width", r.width}};
}

inline nlohmann::json to_json(const MatchPair& m) {
  return {{"source", to_json(m.source)},
          {"dest", to_json(m.dest)},
          {"score", m.score},
          {"kind", m.kind == MatchKind::block ? "block" : "region"}};
}

inline nlohmann::json to_json(const DetectionReport& rep) {
  nlohmann::json matches = nlohmann::json::array();
  for (const MatchPair& m : rep.matches) matches.push_back(to_json(m));
  return {{"method", method_name(rep.method)},
          {"params", rep.params},
          {"matches", matches},
          {"mask_path", rep.mask_path},
          {"elapsed_ms", rep.elapsed_ms},
          {"verdict",
           rep.forgery_detected() ? "forgery_detected" : "not_detected"}};
}

// Union of both regions of every match.
inline BinaryMask detection_mask(const DetectionReport& rep, int width,
                                 int height) {
  BinaryMask mask = make_mask(width, height);
  for (const MatchPair& m : rep.matches) {
    mask.mark_rect(m.source);
    mask.mark_rect(m.dest);
  }
  return mask;
}

}  // namespace cmfd

#endif  // CMFD_REPORT_HPP
