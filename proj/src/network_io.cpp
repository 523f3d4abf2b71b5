#include "nodalfreq/network_io.hpp"

#include "nodalfreq/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace nodalfreq {

using nlohmann::json;

namespace {

std::string read_id(const json& value, const char* what) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw ParseError(std::string(what) + " must be a string or integer");
}

double read_number(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

BusKind read_kind(const json& value) {
  if (!value.is_string()) throw ParseError("bus kind must be a string");
  const auto s = value.get<std::string>();
  if (s == "generator") return BusKind::Generator;
  if (s == "load") return BusKind::Load;
  if (s == "passive") return BusKind::Passive;
  throw ParseError("unknown bus kind '" + s + "'");
}

Bus read_bus(const json& obj) {
  if (!obj.is_object()) throw ParseError("bus entry must be an object");
  if (!obj.contains("id")) throw ParseError("bus entry without 'id'");
  if (!obj.contains("kind")) throw ParseError("bus entry without 'kind'");
  Bus bus;
  bus.id = read_id(obj.at("id"), "bus id");
  bus.kind = read_kind(obj.at("kind"));
  if (obj.contains("generator")) {
    const auto& g = obj.at("generator");
    if (!g.is_object()) throw ParseError("'generator' of bus '" + bus.id + "' must be an object");
    bus.generator = GeneratorParams{read_number(g, "inertia"), read_number(g, "damping"), read_number(g, "droop"),
                                    read_number(g, "turbine_time")};
  }
  if (obj.contains("load_power")) bus.load_power = read_number(obj, "load_power");
  if (bus.kind == BusKind::Generator && !bus.generator) {
    throw ParseError("generator bus '" + bus.id + "' lacks 'generator' parameters");
  }
  if (bus.kind == BusKind::Load && !bus.load_power) bus.load_power = 0.0;
  return bus;
}

}  // namespace

PowerNetwork parse_network(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("network document must be a JSON object");

  double omega0 = kDefaultOmega0;
  if (doc.contains("omega0")) omega0 = read_number(doc, "omega0");

  if (!doc.contains("buses") || !doc.at("buses").is_array()) throw ParseError("missing 'buses' array");
  if (!doc.contains("branches") || !doc.at("branches").is_array()) throw ParseError("missing 'branches' array");

  std::vector<Bus> buses;
  for (const auto& b : doc.at("buses")) buses.push_back(read_bus(b));

  std::vector<Branch> branches;
  for (const auto& b : doc.at("branches")) {
    if (!b.is_object() || !b.contains("from") || !b.contains("to")) {
      throw ParseError("branch entry needs 'from' and 'to'");
    }
    branches.push_back(Branch{read_id(b.at("from"), "branch 'from'"), read_id(b.at("to"), "branch 'to'"),
                              read_number(b, "x")});
  }
  return PowerNetwork(std::move(buses), std::move(branches), omega0);
}

PowerNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_network(text.str());
}

std::string serialize_network(const PowerNetwork& net) {
  json doc;
  doc["omega0"] = net.omega0();
  json buses = json::array();
  for (const auto& bus : net.buses()) {
    json b;
    b["id"] = bus.id;
    b["kind"] = to_string(bus.kind);
    if (bus.generator) {
      b["generator"] = {{"inertia", bus.generator->inertia},
                        {"damping", bus.generator->damping},
                        {"droop", bus.generator->droop},
                        {"turbine_time", bus.generator->turbine_time}};
    }
    if (bus.load_power) b["load_power"] = *bus.load_power;
    buses.push_back(std::move(b));
  }
  doc["buses"] = std::move(buses);
  json branches = json::array();
  for (const auto& br : net.branches()) branches.push_back({{"from", br.from}, {"to", br.to}, {"x", br.reactance}});
  doc["branches"] = std::move(branches);
  return doc.dump(2) + "\n";
}

void save_network(const PowerNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_network(net);
}

}  // namespace nodalfreq
