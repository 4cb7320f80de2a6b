#include "transjudge/stdlib_symbols.hpp"

#include <map>
#include <regex>

#include "transjudge/code_scan.hpp"

namespace transjudge {

namespace {

const std::map<std::string, std::string, std::less<>>& java_classes() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"ArrayDeque", "java.util"},       {"ArrayList", "java.util"},
      {"Arrays", "java.util"},           {"BigDecimal", "java.math"},
      {"BigInteger", "java.math"},       {"BitSet", "java.util"},
      {"BufferedReader", "java.io"},     {"BufferedWriter", "java.io"},
      {"Collections", "java.util"},      {"Comparator", "java.util"},
      {"Deque", "java.util"},            {"HashMap", "java.util"},
      {"HashSet", "java.util"},          {"IOException", "java.io"},
      {"InputStreamReader", "java.io"},  {"Iterator", "java.util"},
      {"LinkedHashMap", "java.util"},    {"LinkedList", "java.util"},
      {"List", "java.util"},             {"Map", "java.util"},
      {"Objects", "java.util"},          {"Optional", "java.util"},
      {"OutputStreamWriter", "java.io"}, {"PrintWriter", "java.io"},
      {"PriorityQueue", "java.util"},    {"Queue", "java.util"},
      {"Scanner", "java.util"},          {"Set", "java.util"},
      {"Stack", "java.util"},            {"StringTokenizer", "java.util"},
      {"TreeMap", "java.util"},          {"TreeSet", "java.util"},
      {"Collectors", "java.util.stream"}, {"IntStream", "java.util.stream"},
  };
  return table;
}

const std::map<std::string, std::string, std::less<>>& python_names() {
  // name -> module; a name equal to its module is imported as a module.
  static const std::map<std::string, std::string, std::less<>> table{
      {"math", "math"},
      {"sys", "sys"},
      {"collections", "collections"},
      {"itertools", "itertools"},
      {"heapq", "heapq"},
      {"bisect", "bisect"},
      {"re", "re"},
      {"functools", "functools"},
      {"string", "string"},
      {"deque", "collections"},
      {"defaultdict", "collections"},
      {"Counter", "collections"},
      {"OrderedDict", "collections"},
      {"gcd", "math"},
      {"sqrt", "math"},
      {"floor", "math"},
      {"ceil", "math"},
      {"inf", "math"},
      {"permutations", "itertools"},
      {"combinations", "itertools"},
      {"product", "itertools"},
      {"accumulate", "itertools"},
      {"heappush", "heapq"},
      {"heappop", "heapq"},
      {"bisect_left", "bisect"},
      {"bisect_right", "bisect"},
      {"reduce", "functools"},
      {"lru_cache", "functools"},
  };
  return table;
}

const std::map<std::string, std::string, std::less<>>& cpp_headers() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"cin", "iostream"},         {"cout", "iostream"},     {"cerr", "iostream"},
      {"endl", "iostream"},        {"string", "string"},     {"to_string", "string"},
      {"stoi", "string"},          {"stoll", "string"},      {"getline", "string"},
      {"vector", "vector"},        {"map", "map"},           {"set", "set"},
      {"unordered_map", "unordered_map"}, {"unordered_set", "unordered_set"},
      {"queue", "queue"},          {"priority_queue", "queue"}, {"stack", "stack"},
      {"deque", "deque"},          {"pair", "utility"},      {"swap", "utility"},
      {"sort", "algorithm"},       {"reverse", "algorithm"}, {"max_element", "algorithm"},
      {"min_element", "algorithm"}, {"lower_bound", "algorithm"},
      {"upper_bound", "algorithm"}, {"accumulate", "numeric"}, {"gcd", "numeric"},
      {"setprecision", "iomanip"}, {"fixed", "ios"},        {"sqrt", "cmath"},
      {"pow", "cmath"},            {"abs", "cstdlib"},       {"printf", "cstdio"},
      {"scanf", "cstdio"},         {"INT_MAX", "climits"},   {"LLONG_MAX", "climits"},
  };
  return table;
}

std::string_view strip_std(std::string_view symbol) {
  if (symbol.substr(0, 5) == "std::") symbol.remove_prefix(5);
  return symbol;
}

}  // namespace

std::optional<std::string> import_for_symbol(Language lang, std::string_view symbol) {
  switch (lang) {
    case Language::Java: {
      auto it = java_classes().find(symbol);
      if (it == java_classes().end()) return std::nullopt;
      return "import " + it->second + "." + it->first + ";";
    }
    case Language::Python: {
      auto it = python_names().find(symbol);
      if (it == python_names().end()) return std::nullopt;
      if (it->first == it->second) return "import " + it->second;
      return "from " + it->second + " import " + it->first;
    }
    case Language::Cpp: {
      auto it = cpp_headers().find(strip_std(symbol));
      if (it == cpp_headers().end()) return std::nullopt;
      return "#include <" + it->second + ">";
    }
  }
  return std::nullopt;
}

std::vector<std::string> known_symbols(Language lang) {
  const auto& table = lang == Language::Java     ? java_classes()
                      : lang == Language::Python ? python_names()
                                                 : cpp_headers();
  std::vector<std::string> out;
  for (const auto& [name, where] : table) out.push_back(name);
  return out;
}

bool has_import_for(std::string_view code, Language lang, std::string_view symbol) {
  auto line = import_for_symbol(lang, symbol);
  if (!line) return false;
  for (const auto& raw : scan::split_lines(code)) {
    const std::string l(scan::trim(raw));
    if (l == *line) return true;
    if (lang == Language::Java) {
      const std::string pkg = java_classes().find(symbol)->second;
      if (l == "import " + pkg + ".*;") return true;
    } else if (lang == Language::Cpp) {
      if (l == "#include <bits/stdc++.h>") return true;
    } else {
      const std::string mod = python_names().find(symbol)->second;
      if (l == "from " + mod + " import *") return true;
      static const std::regex from_import(R"(^from\s+(\w+)\s+import\s+(.+)$)");
      std::smatch m;
      if (std::regex_match(l, m, from_import) && m[1] == mod) {
        const std::string names = m[2];
        if (scan::contains_word(names, symbol)) return true;
      }
    }
  }
  return false;
}

}  // namespace transjudge
