#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "crowdforge/citygen/semantic_city.hpp"

namespace crowdforge::population {

enum class Gender { Male, Female };
enum class AgeGroup { Child, Adult, Elder };

// A household template: member counts per demographic column, weighted by
// how often it occurs in the source census.
struct PatternRow {
    int adultMen = 0;
    int adultWomen = 0;
    int elderMen = 0;
    int elderWomen = 0;
    int boys = 0;
    int girls = 0;
    double weight = 0.0;

    int members() const { return adultMen + adultWomen + elderMen + elderWomen + boys + girls; }
};

struct PatternTable {
    std::vector<PatternRow> rows;
    double totalWeight() const;
};

// CSV with the exact header
//   adult_men,adult_women,elder_men,elder_women,boys,girls,count
// '#' comments and blank lines allowed. Throws std::runtime_error.
PatternTable parsePatterns(const std::string& text, const std::string& file = "");
PatternTable loadPatterns(const std::filesystem::path& path);

struct Person {
    int id = -1;
    int household = -1;
    int age = 0;
    Gender gender = Gender::Male;
    int homeBuilding = -1;

    AgeGroup group() const {
        return age < 18 ? AgeGroup::Child : (age < 65 ? AgeGroup::Adult : AgeGroup::Elder);
    }
    // Meters per second while walking the street network.
    double walkSpeed() const {
        switch (group()) {
            case AgeGroup::Child: return 1.1;
            case AgeGroup::Adult: return 1.4;
            case AgeGroup::Elder: return 0.9;
        }
        return 1.4;
    }
};

struct Household {
    int id = -1;
    int homeBuilding = -1;
    std::vector<int> members;  // person ids, adults first, then elders, children
};

struct Population {
    std::uint64_t seed = 0;
    std::vector<Person> persons;
    std::vector<Household> households;
    std::map<std::string, std::string> inputDigests;
};

// Draws weighted household patterns until `targetPersons` is reached, rolls
// member ages (children 4-17, adults 18-64, elders 65-90) and assigns each
// household one apartment, weighted by the buildings' free capacity. Throws
// std::runtime_error when the city runs out of apartments first.
Population samplePopulation(const citygen::SemanticCity& city, const PatternTable& patterns,
                            int targetPersons, std::uint64_t seed);

std::string populationToJson(const Population& pop);
Population populationFromJson(const std::string& text);
void savePopulationJson(const Population& pop, const std::filesystem::path& path);
Population loadPopulationJson(const std::filesystem::path& path);

}  // namespace crowdforge::population
