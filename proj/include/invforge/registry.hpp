#pragma once

#include <memory>

#include "invforge/classes.hpp"
#include "invforge/metric.hpp"

namespace invforge {

using ClassPtr = std::shared_ptr<const AmalgamationClass>;

// "graphs", "triangle-free", "kaleidoscope:<base>", "metric".
inline ClassPtr make_class(const std::string& name) {
    if (name == "graphs") return std::make_shared<GraphClass>(false);
    if (name == "triangle-free") return std::make_shared<GraphClass>(true);
    if (name == "kaleidoscope:graphs") return std::make_shared<KaleidoscopeClass>(false);
    if (name == "kaleidoscope:triangle-free") return std::make_shared<KaleidoscopeClass>(true);
    if (name == "metric") return std::make_shared<MetricClass>();
    throw Error(ErrorKind::ConfigError, "unknown class '" + name + "'");
}

inline std::vector<std::string> shipped_classes() {
    return {"graphs", "triangle-free", "kaleidoscope:graphs", "metric"};
}

}  // namespace invforge
