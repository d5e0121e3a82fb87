// Deterministic synthetic corpus with planted topics, for demos and tests.
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "topomap/io_util.hpp"
#include "topomap/rng.hpp"

namespace fs = std::filesystem;

namespace {

struct Topic {
  std::string name;
  std::vector<std::string> words;
  std::vector<std::string> journals;
  double weight;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> t = {
      {"invasion", {"invasive", "propagule", "naturalization", "spread", "establishment", "alien"},
       {"Biological Invasions", "Diversity and Distributions"}, 0.20},
      {"impact", {"impact", "native-community", "competition", "displacement", "ecosystem", "decline"},
       {"Journal of Ecology", "Oikos"}, 0.16},
      {"aquatic", {"freshwater", "ballast", "mussel", "estuary", "zooplankton", "lake"},
       {"Freshwater Biology", "Aquatic Invasions"}, 0.14},
      {"genetics", {"genetic", "admixture", "haplotype", "bottleneck", "microsatellite", "lineage"},
       {"Molecular Ecology", "Evolutionary Applications"}, 0.13},
      {"management", {"eradication", "control", "biocontrol", "policy", "risk-assessment", "cost"},
       {"Journal of Applied Ecology", "Biological Conservation"}, 0.12},
      {"plants", {"weed", "seed", "allelopathy", "grassland", "herbivory", "pollinator"},
       {"Plant Ecology", "Weed Research"}, 0.10},
      {"insects", {"beetle", "ant", "parasitoid", "forest-pest", "wasp", "colony"},
       {"Ecological Entomology", "Insect Conservation"}, 0.08},
      {"disease", {"pathogen", "chytrid", "amphibian", "host", "virulence", "transmission"},
       {"EcoHealth", "Parasitology"}, 0.07},
  };
  return t;
}

const std::vector<std::string> kShared = {"species", "population", "model", "data", "distribution", "survey",
                                          "field", "experiment", "effect", "pattern", "habitat", "study"};

const std::vector<std::string> kQuery = {"invasive species", "alien species", "non-native species"};

std::string pick(const std::vector<std::string>& v, topomap::Rng& rng) { return v[rng.below(v.size())]; }

std::size_t sample_topic(topomap::Rng& rng) {
  double u = rng.uniform(), acc = 0.0;
  const auto& t = topics();
  for (std::size_t i = 0; i < t.size(); ++i) {
    acc += t[i].weight;
    if (u < acc) return i;
  }
  return t.size() - 1;
}

std::string sentence(std::size_t topic, std::size_t words, topomap::Rng& rng) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    const double u = rng.uniform();
    std::string w = u < 0.55 ? pick(topics()[topic].words, rng) : u < 0.9 ? pick(kShared, rng) : "the";
    if (!s.empty()) s += i % 4 == 2 ? " of " : " ";
    s += w;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topomap-synth: synthetic corpus with planted topics"};
  std::size_t docs = 2000;
  std::uint64_t seed = 7;
  std::string out = "data/synthetic";
  app.add_option("--docs", docs, "publications to generate");
  app.add_option("--seed", seed);
  app.add_option("-o,--out", out, "output directory");
  CLI11_PARSE(app, argc, argv);

  topomap::Rng rng(seed);
  const fs::path dir(out);
  fs::create_directories(dir);

  struct Doc {
    std::string id;
    int year;
    std::size_t topic;
  };
  std::vector<Doc> all;
  all.reserve(docs);
  for (std::size_t i = 0; i < docs; ++i) {
    const int year = 1996 + static_cast<int>(rng.below(24));
    all.push_back({"", year, sample_topic(rng)});
  }
  std::stable_sort(all.begin(), all.end(), [](const Doc& a, const Doc& b) { return a.year < b.year; });
  for (std::size_t i = 0; i < all.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "W%06zu", i + 1);
    all[i].id = buf;
  }

  std::vector<std::vector<std::size_t>> by_topic(topics().size());
  auto pubs = topomap::io::open_output(dir / "publications.jsonl");
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& d = all[i];
    const double u = rng.uniform();
    const char* type = u < 0.78 ? "article" : u < 0.86 ? "review" : u < 0.90 ? "letter" : u < 0.95 ? "editorial" : "proceedings paper";
    nlohmann::ordered_json refs = nlohmann::ordered_json::array();
    const std::size_t r = 3 + rng.below(10);
    for (std::size_t k = 0; k < r && i > 0; ++k) {
      const double v = rng.uniform();
      if (v < 0.1) {
        refs.push_back("X" + std::to_string(rng.below(100000)));
        continue;
      }
      const auto& pool = by_topic[d.topic];
      if (v < 0.88 && !pool.empty())
        refs.push_back(all[pool[rng.below(pool.size())]].id);
      else
        refs.push_back(all[rng.below(i)].id);
    }
    std::string title = sentence(d.topic, 5, rng);
    if (rng.uniform() < 0.3) title = pick(kQuery, rng) + " " + title;
    nlohmann::ordered_json j{{"id", d.id},
                             {"year", d.year},
                             {"doc_type", type},
                             {"title", title},
                             {"abstract", sentence(d.topic, 18, rng) + ". " + sentence(d.topic, 14, rng) + "."},
                             {"journal", pick(topics()[d.topic].journals, rng)},
                             {"references", refs}};
    pubs << j.dump() << '\n';
    if (rng.uniform() < 0.005) pubs << j.dump() << '\n';
    by_topic[d.topic].push_back(i);
  }

  // Microfields: each topic splits into a main field and a minor one; some
  // documents land in an unrelated field or none.
  std::map<std::string, std::size_t> counts;
  auto cls = topomap::io::open_output(dir / "classification.tsv");
  cls << "pub_id\tmicrofield_id\n";
  for (const auto& d : all) {
    const double u = rng.uniform();
    if (u < 0.04) continue;
    std::string mf;
    if (u < 0.10)
      mf = "MF" + std::to_string(100 + rng.below(12));
    else
      mf = "MF" + std::to_string(10 * d.topic + (u < 0.80 ? 1 : 2));
    cls << d.id << '\t' << mf << '\n';
    ++counts[mf];
  }
  auto meta = topomap::io::open_output(dir / "microfields.tsv");
  meta << "microfield_id\tglobal_size\tlabel\n";
  for (const auto& [mf, n] : counts) {
    const int number = std::stoi(mf.substr(2));
    double factor = 1.0 + 3.0 * rng.uniform();
    std::string label = number >= 100 ? "unrelated field " + std::to_string(number) : topics()[static_cast<std::size_t>(number / 10)].name;
    if (number < 100 && number % 10 == 2) {
      factor = 1.5 + 20.0 * rng.uniform();
      label += " (minor)";
    }
    meta << mf << '\t' << static_cast<std::size_t>(std::ceil(static_cast<double>(n) * factor)) << '\t' << label << '\n';
  }
  std::cerr << "wrote " << all.size() << " publications to " << dir.string() << '\n';
  return 0;
}
