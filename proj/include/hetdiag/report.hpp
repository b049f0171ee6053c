#pragma once

#include <string>
#include <vector>

#include "hetdiag/diagnostics.hpp"
#include "hetdiag/inference.hpp"

namespace hetdiag {

// Effects print with 4 significant figures, probabilities and weights with
// 3 decimals and the leading zero stripped.
std::string format_effect(double v);
std::string format_share(double v);

struct RenderOptions {
  bool noisily = false;                 // prepend the full coefficient table
  const BootstrapResult* bootstrap = nullptr;
  std::vector<std::string> bootstrap_labels;
};

std::string render_text(const DiagnosticsReport& r,
                        const RenderOptions& opt = {});

// Same content at full precision, one JSON object.
std::string render_json(const DiagnosticsReport& r,
                        const RenderOptions& opt = {});

}  // namespace hetdiag
