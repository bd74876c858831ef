#pragma once

#include <map>
#include <string>
#include <vector>

#include "nucc/system.hpp"

namespace nucc {

struct CatalogEntry {
  std::string id;
  std::map<std::string, double> defaults;
  std::string summary;
};

// The built-in model family, in listing order.
const std::vector<CatalogEntry>& catalog_entries();

// Instantiates a catalog system. Unknown ids or parameters and out-of-range
// values throw SchemaError. The returned SystemDef carries the fully
// resolved parameter map in its catalog field.
SystemDef make_catalog_system(const CatalogRef& ref);
SystemDef make_catalog_system(const std::string& id);

}  // namespace nucc
