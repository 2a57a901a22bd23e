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


#ifndef VULNTRIAGE_SVG_HPP_
#define VULNTRIAGE_SVG_HPP_

#include <string>
#include <utility>
#include <vector>

// Minimal self-contained SVG charts. Output carries no timestamps or other
// run-dependent metadata.
namespace vulntriage::svg {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  int group = 0;
};

std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values);
std::string line_chart(const std::string& title, const std::vector<Series>& series,
                       const std::string& x_label, const std::string& y_label);
std::string scatter(const std::string& title, const std::vector<ScatterPoint>& points,
                    const std::vector<std::string>& group_names);
// rows x cols grid; row labels drawn on the left.
std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::vector<double>>& values);

std::string escape(const std::string& text);

}  // namespace vulntriage::svg

#endif  // VULNTRIAGE_SVG_HPP_
