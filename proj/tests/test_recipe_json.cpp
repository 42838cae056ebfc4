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


#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "hodr/recipe_json.hpp"

namespace hodr {
namespace {

using nlohmann::json;

std::string schema_error(const std::string& text) {
  try {
    recipe_from_json(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
    return e.what();
  }
  ADD_FAILURE() << "no error for " << text;
  return "";
}

TEST(RecipeJson, ThousandRandomRecipesRoundTrip) {
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    const DegradationRecipe r = sample_recipe(seed * 7919 + 1, 1 + seed % 3, 2 + seed % 3);
    EXPECT_EQ(recipe_from_json(recipe_to_json(r)), r) << seed;
  }
}

TEST(RecipeJson, ExtremeNumbersRoundTripExactly) {
  DegradationRecipe r = sample_recipe(1, 1, 2);
  r.stages[0].resize.scale = 0.1 + 0.2;  // not a short decimal
  r.stages[0].noise.level = 1.0 / 3.0;
  r.stages[0].noise_seed = ~0ull;
  r.master_seed = (1ull << 63) + 12345;
  EXPECT_EQ(recipe_from_json(recipe_to_json(r)), r);
}

TEST(RecipeJson, FieldNamesAreSnakeCase) {
  const json j = json::parse(recipe_to_json(sample_recipe(3, 2, 2)));
  for (const char* key : {"order", "stages", "final_scale", "final_method", "master_seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  const json& st = j["stages"][0];
  for (const char* key : {"blur", "resize", "noise", "noise_seed"}) EXPECT_TRUE(st.contains(key));
  for (const char* key : {"family", "half_size", "sigma_x", "sigma_y", "theta", "beta", "omega_c"}) {
    EXPECT_TRUE(st["blur"].contains(key)) << key;
  }
  for (const char* key : {"mode", "scale", "method"}) EXPECT_TRUE(st["resize"].contains(key));
  for (const char* key : {"kind", "level", "gray"}) EXPECT_TRUE(st["noise"].contains(key));
}

TEST(RecipeJson, AbsentBlurIsNull) {
  DegradationRecipe r = sample_recipe(4, 2, 2);
  r.stages[1].blur.reset();
  const json j = json::parse(recipe_to_json(r));
  EXPECT_TRUE(j["stages"][1]["blur"].is_null());
  EXPECT_EQ(recipe_from_json(recipe_to_json(r)), r);
}

TEST(RecipeJson, MissingStagesNamesTheField) {
  json j = json::parse(recipe_to_json(sample_recipe(5, 1, 2)));
  j.erase("stages");
  EXPECT_NE(schema_error(j.dump()).find("stages"), std::string::npos);
}

TEST(RecipeJson, NestedErrorsNameTheFullPath) {
  json j = json::parse(recipe_to_json(sample_recipe(6, 2, 2)));
  j["stages"][1]["noise"]["level"] = "loud";
  EXPECT_NE(schema_error(j.dump()).find("stages[1].noise.level"), std::string::npos);
}

TEST(RecipeJson, BadEnumNamesTheField) {
  json j = json::parse(recipe_to_json(sample_recipe(7, 1, 2)));
  j["final_method"] = "lanczos";
  EXPECT_NE(schema_error(j.dump()).find("final_method"), std::string::npos);
}

TEST(RecipeJson, UnknownFieldsAreIgnored) {
  const DegradationRecipe r = sample_recipe(8, 2, 3);
  json j = json::parse(recipe_to_json(r));
  j["comment"] = "from the future";
  j["stages"][0]["extra"] = {1, 2, 3};
  EXPECT_EQ(recipe_from_json(j.dump()), r);
}

TEST(RecipeJson, OrderMustMatchStageCount) {
  json j = json::parse(recipe_to_json(sample_recipe(9, 2, 2)));
  j["order"] = 3;
  EXPECT_NE(schema_error(j.dump()).find("order"), std::string::npos);
}

TEST(RecipeJson, MalformedTextIsASchemaViolation) {
  schema_error("{ not json");
  schema_error("[1, 2, 3]");
  schema_error("");
}

}  // namespace
}  // namespace hodr
