#pragma once

#include <stdexcept>
#include <string>

namespace hmflow {

/// Which pipeline stage raised an error; carried through to the CLI exit code.
enum class Stage { geometry, surface, differential, metric, initial_map, flow, config, io };

inline const char* stage_name(Stage s)
{
  switch (s) {
    case Stage::geometry: return "geometry";
    case Stage::surface: return "surface";
    case Stage::differential: return "differential";
    case Stage::metric: return "metric";
    case Stage::initial_map: return "initial-map";
    case Stage::flow: return "flow";
    case Stage::config: return "config";
    case Stage::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Stage stage, const std::string& what)
      : std::runtime_error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}

  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

}  // namespace hmflow
