#pragma once
// JSON configuration file: one optional section per module, unknown keys
// rejected, absent keys keep the base values.

#include <filesystem>
#include <string>

#include "genir/decode.hpp"
#include "genir/retriever.hpp"
#include "genir/simgen.hpp"

namespace genir {

struct AppConfig {
    RetrieverConfig retriever;
    BeamConfig beam;
    Sim1Config sim1;
    Sim2Config sim2;
    Sim3Config sim3;
};

// Parses the file and overlays the present keys onto `base`; validates the
// result and throws std::invalid_argument listing any unknown key.
AppConfig load_config(const std::filesystem::path& path, AppConfig base = {});

// Parse from a JSON string (the file loader's core, exposed for tests).
AppConfig parse_config(const std::string& text, AppConfig base = {});

std::string config_to_json(const AppConfig& config);

}  // namespace genir
