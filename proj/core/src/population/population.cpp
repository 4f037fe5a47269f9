#include "crowdforge/population/population.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "crowdforge/common/digest.hpp"
#include "crowdforge/common/rng.hpp"
#include "crowdforge/common/version.hpp"

namespace crowdforge::population {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kHeader = "adult_men,adult_women,elder_men,elder_women,boys,girls,count";

std::string stripped(std::string s) {
    auto hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> splitCsv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(stripped(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(stripped(cur));
    return out;
}

}  // namespace

double PatternTable::totalWeight() const {
    double w = 0;
    for (const auto& r : rows) w += r.weight;
    return w;
}

PatternTable parsePatterns(const std::string& text, const std::string& file) {
    PatternTable table;
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    bool headerSeen = false;
    auto bad = [&](const std::string& msg) {
        throw std::runtime_error((file.empty() ? "patterns" : file) + ":" +
                                 std::to_string(lineNo) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineNo;
        std::string s = stripped(line);
        if (s.empty()) continue;
        if (!headerSeen) {
            std::string normalized;
            for (const auto& col : splitCsv(s)) {
                if (!normalized.empty()) normalized += ',';
                normalized += col;
            }
            if (normalized != kHeader)
                bad("expected header '" + std::string(kHeader) + "'");
            headerSeen = true;
            continue;
        }
        auto cols = splitCsv(s);
        if (cols.size() != 7) bad("expected 7 columns, got " + std::to_string(cols.size()));
        PatternRow row;
        int* fields[6] = {&row.adultMen, &row.adultWomen, &row.elderMen,
                          &row.elderWomen, &row.boys,     &row.girls};
        for (int i = 0; i < 6; ++i) {
            try {
                std::size_t used = 0;
                int v = std::stoi(cols[i], &used);
                if (used != cols[i].size() || v < 0) throw std::invalid_argument("");
                *fields[i] = v;
            } catch (const std::exception&) {
                bad("bad member count '" + cols[i] + "'");
            }
        }
        try {
            std::size_t used = 0;
            row.weight = std::stod(cols[6], &used);
            if (used != cols[6].size() || row.weight < 0) throw std::invalid_argument("");
        } catch (const std::exception&) {
            bad("bad count '" + cols[6] + "'");
        }
        if (row.members() == 0) bad("pattern with no members");
        table.rows.push_back(row);
    }
    if (!headerSeen) throw std::runtime_error((file.empty() ? "patterns" : file) + ": empty file");
    if (table.rows.empty())
        throw std::runtime_error((file.empty() ? "patterns" : file) + ": no patterns");
    return table;
}

PatternTable loadPatterns(const std::filesystem::path& path) {
    return parsePatterns(readFileText(path), path.string());
}

Population samplePopulation(const citygen::SemanticCity& city, const PatternTable& patterns,
                            int targetPersons, std::uint64_t seed) {
    if (targetPersons < 1) throw std::runtime_error("population: target must be >= 1");
    double total = patterns.totalWeight();
    if (total <= 0) throw std::runtime_error("population: all pattern weights are zero");

    // Apartments still free, per residential building, in id order.
    std::vector<std::pair<int, int>> housing;  // (building id, free apartments)
    long freeApartments = 0;
    for (const auto& b : city.buildings) {
        if (b.residentialCapacity > 0) {
            housing.push_back({b.id, b.residentialCapacity});
            freeApartments += b.residentialCapacity;
        }
    }

    Population pop;
    pop.seed = seed;
    Rng rng = Rng::substream(seed, 0x506f70);

    auto drawPattern = [&]() -> const PatternRow& {
        double r = rng.uniform01() * total;
        double acc = 0;
        for (const auto& row : patterns.rows) {
            acc += row.weight;
            if (r < acc) return row;
        }
        return patterns.rows.back();
    };

    while (static_cast<int>(pop.persons.size()) < targetPersons) {
        if (freeApartments == 0)
            throw std::runtime_error(
                "population: residential capacity exhausted after " +
                std::to_string(pop.persons.size()) + " of " + std::to_string(targetPersons) +
                " persons");
        const PatternRow& row = drawPattern();

        Household hh;
        hh.id = static_cast<int>(pop.households.size());

        // Weighted by free apartments across buildings.
        long pick = static_cast<long>(rng.uniformInt(static_cast<std::uint64_t>(freeApartments)));
        for (auto& [buildingId, free] : housing) {
            if (pick < free) {
                hh.homeBuilding = buildingId;
                --free;
                --freeApartments;
                break;
            }
            pick -= free;
        }

        auto addPerson = [&](int lo, int hi, Gender gender) {
            Person p;
            p.id = static_cast<int>(pop.persons.size());
            p.household = hh.id;
            p.age = lo + static_cast<int>(rng.uniformInt(static_cast<std::uint64_t>(hi - lo + 1)));
            p.gender = gender;
            p.homeBuilding = hh.homeBuilding;
            hh.members.push_back(p.id);
            pop.persons.push_back(p);
        };
        for (int i = 0; i < row.adultMen; ++i) addPerson(18, 64, Gender::Male);
        for (int i = 0; i < row.adultWomen; ++i) addPerson(18, 64, Gender::Female);
        for (int i = 0; i < row.elderMen; ++i) addPerson(65, 90, Gender::Male);
        for (int i = 0; i < row.elderWomen; ++i) addPerson(65, 90, Gender::Female);
        for (int i = 0; i < row.boys; ++i) addPerson(4, 17, Gender::Male);
        for (int i = 0; i < row.girls; ++i) addPerson(4, 17, Gender::Female);

        pop.households.push_back(std::move(hh));
    }
    return pop;
}

std::string populationToJson(const Population& pop) {
    Json j;
    j["meta"]["seed"] = pop.seed;
    j["meta"]["version"] = kVersion;
    j["meta"]["inputs"] = Json::object();
    for (const auto& [name, digest] : pop.inputDigests) j["meta"]["inputs"][name] = digest;
    j["persons"] = Json::array();
    for (const auto& p : pop.persons) {
        Json pj;
        pj["id"] = p.id;
        pj["household"] = p.household;
        pj["age"] = p.age;
        pj["gender"] = p.gender == Gender::Female ? "f" : "m";
        pj["home"] = p.homeBuilding;
        j["persons"].push_back(std::move(pj));
    }
    j["households"] = Json::array();
    for (const auto& h : pop.households) {
        Json hj;
        hj["id"] = h.id;
        hj["home"] = h.homeBuilding;
        hj["members"] = h.members;
        j["households"].push_back(std::move(hj));
    }
    return j.dump(2) + "\n";
}

Population populationFromJson(const std::string& text) {
    Json j = Json::parse(text);
    Population pop;
    pop.seed = j.at("meta").at("seed").get<std::uint64_t>();
    if (j.at("meta").contains("inputs")) {
        for (auto it = j["meta"]["inputs"].begin(); it != j["meta"]["inputs"].end(); ++it)
            pop.inputDigests[it.key()] = it.value().get<std::string>();
    }
    for (const auto& pj : j.at("persons")) {
        Person p;
        p.id = pj.at("id").get<int>();
        p.household = pj.at("household").get<int>();
        p.age = pj.at("age").get<int>();
        p.gender = pj.at("gender").get<std::string>() == "f" ? Gender::Female : Gender::Male;
        p.homeBuilding = pj.at("home").get<int>();
        pop.persons.push_back(p);
    }
    for (const auto& hj : j.at("households")) {
        Household h;
        h.id = hj.at("id").get<int>();
        h.homeBuilding = hj.at("home").get<int>();
        h.members = hj.at("members").get<std::vector<int>>();
        pop.households.push_back(std::move(h));
    }
    return pop;
}

void savePopulationJson(const Population& pop, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << populationToJson(pop);
}

Population loadPopulationJson(const std::filesystem::path& path) {
    return populationFromJson(readFileText(path));
}

}  // namespace crowdforge::population
