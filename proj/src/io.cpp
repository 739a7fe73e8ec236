#include "varfn/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace varfn::io {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view context) {
  if (!j.is_object()) throw std::invalid_argument(std::string(context) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw std::invalid_argument(std::string(context) + ": unknown key '" + key + "'");
  }
}

json to_json(const CoeffTensor& t) {
  json j;
  j["dims"] = t.dims();
  if (t.is_rank1()) {
    j["representation"] = "rank1";
    j["data"] = t.factors();
  } else {
    j["representation"] = "dense";
    j["data"] = t.data();
  }
  return j;
}

CoeffTensor coeff_tensor_from_json(const json& j) {
  reject_unknown_keys(j, {"dims", "representation", "data"}, "tensor");
  const auto dims = j.at("dims").get<std::vector<std::size_t>>();
  const std::string rep = j.value("representation", std::string("dense"));
  if (rep == "dense") return CoeffTensor::dense(dims, j.at("data").get<std::vector<double>>());
  if (rep == "rank1") {
    CoeffTensor t = CoeffTensor::rank1(j.at("data").get<std::vector<std::vector<double>>>());
    if (t.dims() != dims) throw std::invalid_argument("tensor: factor lengths do not match dims");
    return t;
  }
  throw std::invalid_argument("tensor: unknown representation '" + rep + "'");
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

json to_json(const model::ModelClass& cls) {
  return std::visit(
      Overloaded{
          [](const model::LinearSpan& s) {
            return json{{"type", "linear_span"}, {"dims", s.dims}, {"indices", s.indices}};
          },
          [](const model::FullSpace& s) { return json{{"type", "full_space"}, {"dims", s.dims}}; },
          [](const model::WeightedSparse& s) {
            return json{{"type", "weighted_sparse"}, {"dims", s.dims}, {"weights", s.weights}, {"budget", s.budget}};
          },
          [](const model::LowRankMatrix& l) {
            return json{{"type", "low_rank_matrix"}, {"rows", l.rows}, {"cols", l.cols}, {"rank", l.rank}};
          },
          [](const model::Rank1Cone& c) { return json{{"type", "rank1_cone"}, {"dims", c.dims}}; },
          [](const model::Shift& s) {
            return json{{"type", "shift"}, {"anchor", to_json(s.anchor)}, {"inner", to_json(s.inner)}};
          },
          [](const model::Union& u) {
            json members = json::array();
            for (const auto& m : u.members) members.push_back(to_json(m));
            return json{{"type", "union"}, {"members", members}};
          },
          [](const model::Ball& b) {
            return json{{"type", "ball"}, {"center", to_json(b.center)}, {"radius", b.radius}, {"inner", to_json(b.inner)}};
          },
          [](const model::TangentLowRank& t) {
            return json{{"type", "tangent_low_rank"}, {"at", to_json(t.at)}, {"rank", t.rank}};
          },
      },
      cls.variant());
}

model::ModelClass model_class_from_json(const json& j) {
  using model::ModelClass;
  const std::string type = j.at("type").get<std::string>();
  if (type == "linear_span") {
    reject_unknown_keys(j, {"type", "dims", "indices"}, type);
    return ModelClass::linear_span(j.at("dims").get<std::vector<std::size_t>>(),
                                   j.at("indices").get<std::vector<std::vector<std::size_t>>>());
  }
  if (type == "full_space") {
    reject_unknown_keys(j, {"type", "dims"}, type);
    return ModelClass::full_space(j.at("dims").get<std::vector<std::size_t>>());
  }
  if (type == "weighted_sparse") {
    reject_unknown_keys(j, {"type", "dims", "weights", "budget"}, type);
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    std::vector<double> weights;
    if (j.contains("weights")) {
      weights = j.at("weights").get<std::vector<double>>();
    } else {
      weights.assign(dense_size(dims), 1.0);
    }
    return ModelClass::weighted_sparse(dims, std::move(weights), j.at("budget").get<double>());
  }
  if (type == "low_rank_matrix") {
    reject_unknown_keys(j, {"type", "rows", "cols", "rank"}, type);
    return ModelClass::low_rank_matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                                       j.at("rank").get<std::size_t>());
  }
  if (type == "rank1_cone") {
    reject_unknown_keys(j, {"type", "dims"}, type);
    return ModelClass::rank1_cone(j.at("dims").get<std::vector<std::size_t>>());
  }
  if (type == "shift") {
    reject_unknown_keys(j, {"type", "anchor", "inner"}, type);
    return ModelClass::shift(coeff_tensor_from_json(j.at("anchor")), model_class_from_json(j.at("inner")));
  }
  if (type == "union") {
    reject_unknown_keys(j, {"type", "members"}, type);
    std::vector<ModelClass> members;
    for (const auto& m : j.at("members")) members.push_back(model_class_from_json(m));
    return ModelClass::union_of(std::move(members));
  }
  if (type == "ball") {
    reject_unknown_keys(j, {"type", "center", "radius", "inner"}, type);
    return ModelClass::ball(coeff_tensor_from_json(j.at("center")), j.at("radius").get<double>(),
                            model_class_from_json(j.at("inner")));
  }
  if (type == "tangent_low_rank") {
    reject_unknown_keys(j, {"type", "at", "rank"}, type);
    return ModelClass::tangent_low_rank(coeff_tensor_from_json(j.at("at")), j.at("rank").get<std::size_t>());
  }
  throw std::invalid_argument("model class: unknown type '" + type + "'");
}

}  // namespace varfn::io
