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

#include "hodr/cli.hpp"
#include "hodr/convolve.hpp"
#include "hodr/degrade.hpp"
#include "hodr/error.hpp"
#include "hodr/image.hpp"
#include "hodr/kernels.hpp"
#include "hodr/metrics.hpp"
#include "hodr/png_io.hpp"
#include "hodr/recipe_json.hpp"
#include "hodr/resize.hpp"
#include "hodr/restore.hpp"
#include "hodr/rng.hpp"
#include "hodr/selftest.hpp"
#include "hodr/synthetic.hpp"
