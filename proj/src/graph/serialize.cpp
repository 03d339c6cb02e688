#include "adrec/graph/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adrec/error.hpp"

namespace adrec::graph {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(',', pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot read " + path);
  return in;
}

template <typename Node, std::size_t N>
void write_nodes(const std::string& path, const std::string& id_col,
                 const std::vector<Node>& nodes, std::string (*id_of)(const Node&)) {
  auto out = open_out(path);
  out << id_col;
  for (std::size_t i = 0; i < N; ++i) out << ",f" << i;
  out << '\n';
  for (const auto& n : nodes) {
    out << id_of(n);
    for (double f : n.features) out << ',' << fmt(f);
    out << '\n';
  }
}

}  // namespace

void save_graph(const HeteroGraph& graph, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_nodes<UserNode, kUserFeatures>(dir + "/users.csv", "unified_user_id", graph.users,
                                       +[](const UserNode& n) { return n.unified_user_id; });
  write_nodes<AdNode, kAdFeatures>(dir + "/ads.csv", "ad_id", graph.ads,
                                   +[](const AdNode& n) { return n.ad_id; });
  write_nodes<PlatformNode, kPlatformFeatures>(dir + "/platforms.csv", "platform_id",
                                               graph.platforms,
                                               +[](const PlatformNode& n) { return n.platform_id; });

  auto out = open_out(dir + "/edges.csv");
  out << "kind,src_kind,src,dst_kind,dst,weight,timestamp";
  for (int i = 0; i < ingest::kEdgeAttrCount; ++i) out << ",attr_" << i;
  out << '\n';
  for (const auto& e : graph.edges) {
    out << to_string(e.kind) << ',' << to_string(e.src.kind) << ',' << e.src.index << ','
        << to_string(e.dst.kind) << ',' << e.dst.index << ',' << fmt(e.weight) << ','
        << e.timestamp;
    for (double a : e.attrs) out << ',' << fmt(a);
    out << '\n';
  }
}

HeteroGraph load_graph(const std::string& dir) {
  HeteroGraph g;
  std::string line;

  {
    auto in = open_in(dir + "/users.csv");
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split(line);
      if (f.size() != 1 + kUserFeatures) throw input_error("users.csv: bad row: " + line);
      UserNode n;
      n.unified_user_id = f[0];
      for (int i = 0; i < kUserFeatures; ++i) n.features[i] = std::stod(f[1 + i]);
      g.users.push_back(std::move(n));
    }
  }
  {
    auto in = open_in(dir + "/ads.csv");
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split(line);
      if (f.size() != 1 + kAdFeatures) throw input_error("ads.csv: bad row: " + line);
      AdNode n;
      n.ad_id = f[0];
      for (int i = 0; i < kAdFeatures; ++i) n.features[i] = std::stod(f[1 + i]);
      g.ads.push_back(std::move(n));
    }
  }
  {
    auto in = open_in(dir + "/platforms.csv");
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split(line);
      if (f.size() != 1 + kPlatformFeatures) throw input_error("platforms.csv: bad row: " + line);
      PlatformNode n;
      n.platform_id = f[0];
      for (int i = 0; i < kPlatformFeatures; ++i) n.features[i] = std::stod(f[1 + i]);
      g.platforms.push_back(std::move(n));
    }
  }
  {
    auto in = open_in(dir + "/edges.csv");
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split(line);
      if (f.size() != 7 + ingest::kEdgeAttrCount) throw input_error("edges.csv: bad row: " + line);
      Edge e;
      e.kind = edge_kind_from_string(f[0]);
      e.src = {node_kind_from_string(f[1]), std::stoi(f[2])};
      e.dst = {node_kind_from_string(f[3]), std::stoi(f[4])};
      e.weight = std::stod(f[5]);
      e.timestamp = std::stoll(f[6]);
      for (int i = 0; i < ingest::kEdgeAttrCount; ++i) e.attrs[i] = std::stod(f[7 + i]);
      g.edges.push_back(e);
    }
  }
  g.reindex();
  return g;
}

}  // namespace adrec::graph
