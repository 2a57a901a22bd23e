/*
 * Copyright 2026 The vulntriage Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Writes a synthetic advisory CSV to stdout: make_synthetic [rows] [seed].
#include <cstdlib>
#include <iostream>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  vulntriage::testing::SyntheticOptions o;
  if (argc > 1) o.rows = std::strtoull(argv[1], nullptr, 10);
  if (argc > 2) o.seed = std::strtoull(argv[2], nullptr, 10);
  std::cout << vulntriage::testing::synthetic_csv(o);
}
