#pragma once

#include <filesystem>
#include <string>

#include "crowdforge/citygen/semantic_city.hpp"

namespace crowdforge::citygen {

// Serializes the full city, including leaf geometry, so that a reload is
// behaviorally indistinguishable from the generating run.
std::string cityToJson(const SemanticCity& city);
SemanticCity cityFromJson(const std::string& text);

void saveCityJson(const SemanticCity& city, const std::filesystem::path& path);
SemanticCity loadCityJson(const std::filesystem::path& path);

// Wavefront OBJ dump of the leaf geometry for eyeballing in a viewer.
void saveCityObj(const SemanticCity& city, const std::filesystem::path& path);

}  // namespace crowdforge::citygen
