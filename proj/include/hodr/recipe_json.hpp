// Copyright (c) the hodr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hodr/degrade.hpp"
#include "hodr/error.hpp"
#include "hodr/kernels.hpp"

namespace hodr {

namespace detail {

using Json = nlohmann::ordered_json;

inline Json kernel_to_json(const KernelSpec& k) {
  return Json{{"family", to_string(k.family)}, {"half_size", k.half_size},
              {"sigma_x", k.sigma_x},          {"sigma_y", k.sigma_y},
              {"theta", k.theta},              {"beta", k.beta},
              {"omega_c", k.omega_c}};
}

inline const Json& field(const Json& obj, std::string_view name,
                         const std::string& path) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kSchemaViolation, path + " must be an object");
  }
  auto it = obj.find(std::string(name));
  if (it == obj.end()) {
    throw Error(ErrorCode::kSchemaViolation,
                "missing field \"" + path + std::string(name) + "\"");
  }
  return *it;
}

inline std::string child(const std::string& path, std::string_view name) {
  return path + std::string(name);
}

inline double get_number(const Json& obj, std::string_view name,
                         const std::string& path) {
  const Json& v = field(obj, name, path);
  if (!v.is_number()) {
    throw Error(ErrorCode::kSchemaViolation,
                "field \"" + child(path, name) + "\" must be a number");
  }
  return v.get<double>();
}

inline int64_t get_integer(const Json& obj, std::string_view name,
                           const std::string& path) {
  const Json& v = field(obj, name, path);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kSchemaViolation,
                "field \"" + child(path, name) + "\" must be an integer");
  }
  return v.get<int64_t>();
}

inline uint64_t get_u64(const Json& obj, std::string_view name,
                        const std::string& path) {
  const Json& v = field(obj, name, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
    throw Error(ErrorCode::kSchemaViolation,
                "field \"" + child(path, name) + "\" must be a non-negative integer");
  }
  return v.get<uint64_t>();
}

inline bool get_bool(const Json& obj, std::string_view name,
                     const std::string& path) {
  const Json& v = field(obj, name, path);
  if (!v.is_boolean()) {
    throw Error(ErrorCode::kSchemaViolation,
                "field \"" + child(path, name) + "\" must be a boolean");
  }
  return v.get<bool>();
}

template <typename Parse>
auto get_enum(const Json& obj, std::string_view name, const std::string& path,
              Parse parse) {
  const Json& v = field(obj, name, path);
  if (!v.is_string()) {
    throw Error(ErrorCode::kSchemaViolation,
                "field \"" + child(path, name) + "\" must be a string");
  }
  auto parsed = parse(v.get<std::string>());
  if (!parsed) {
    throw Error(ErrorCode::kSchemaViolation,
                "field \"" + child(path, name) + "\" has unknown value \"" +
                    v.get<std::string>() + "\"");
  }
  return *parsed;
}

inline KernelSpec kernel_from_json(const Json& j, const std::string& path) {
  KernelSpec k;
  k.family = get_enum(j, "family", path, parse_kernel_family);
  k.half_size = static_cast<int>(get_integer(j, "half_size", path));
  k.sigma_x = get_number(j, "sigma_x", path);
  k.sigma_y = get_number(j, "sigma_y", path);
  k.theta = get_number(j, "theta", path);
  k.beta = get_number(j, "beta", path);
  k.omega_c = get_number(j, "omega_c", path);
  return k;
}

}  // namespace detail

inline std::string recipe_to_json(const DegradationRecipe& r) {
  using detail::Json;
  Json stages = Json::array();
  for (const auto& st : r.stages) {
    Json s;
    s["blur"] = st.blur ? detail::kernel_to_json(*st.blur) : Json(nullptr);
    s["resize"] = Json{{"mode", to_string(st.resize.mode)},
                       {"scale", st.resize.scale},
                       {"method", to_string(st.resize.method)}};
    s["noise"] = Json{{"kind", to_string(st.noise.kind)},
                      {"level", st.noise.level},
                      {"gray", st.noise.gray}};
    s["noise_seed"] = st.noise_seed;
    stages.push_back(std::move(s));
  }
  Json j;
  j["order"] = r.order;
  j["stages"] = std::move(stages);
  j["final_scale"] = r.final_scale;
  j["final_method"] = to_string(r.final_method);
  j["master_seed"] = r.master_seed;
  return j.dump(2) + "\n";
}

// Unknown fields are ignored; missing or mistyped ones raise kSchemaViolation
// naming the dotted path of the field.
inline DegradationRecipe recipe_from_json(std::string_view text) {
  using detail::Json;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("malformed JSON: ") + e.what());
  }
  DegradationRecipe r;
  r.order = static_cast<int>(detail::get_integer(j, "order", ""));
  const Json& stages = detail::field(j, "stages", "");
  if (!stages.is_array()) {
    throw Error(ErrorCode::kSchemaViolation, "field \"stages\" must be an array");
  }
  for (size_t i = 0; i < stages.size(); ++i) {
    const std::string p = "stages[" + std::to_string(i) + "].";
    const Json& s = stages[i];
    StageRecipe st;
    const Json& blur = detail::field(s, "blur", p);
    if (!blur.is_null()) st.blur = detail::kernel_from_json(blur, p + "blur.");
    const Json& rs = detail::field(s, "resize", p);
    st.resize.mode = detail::get_enum(rs, "mode", p + "resize.", parse_resize_mode);
    st.resize.scale = detail::get_number(rs, "scale", p + "resize.");
    st.resize.method =
        detail::get_enum(rs, "method", p + "resize.", parse_resize_method);
    const Json& ns = detail::field(s, "noise", p);
    st.noise.kind = detail::get_enum(ns, "kind", p + "noise.", parse_noise_kind);
    st.noise.level = detail::get_number(ns, "level", p + "noise.");
    st.noise.gray = detail::get_bool(ns, "gray", p + "noise.");
    st.noise_seed = detail::get_u64(s, "noise_seed", p);
    r.stages.push_back(std::move(st));
  }
  r.final_scale = static_cast<int>(detail::get_integer(j, "final_scale", ""));
  r.final_method =
      detail::get_enum(j, "final_method", "", parse_resize_method);
  r.master_seed = detail::get_u64(j, "master_seed", "");
  if (r.stages.size() != static_cast<size_t>(r.order)) {
    throw Error(ErrorCode::kSchemaViolation,
                "field \"stages\" has " + std::to_string(r.stages.size()) +
                    " entries but \"order\" is " + std::to_string(r.order));
  }
  return r;
}

}  // namespace hodr
