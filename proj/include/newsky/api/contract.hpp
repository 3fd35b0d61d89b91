#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace newsky::api {

struct ParamSpec {
    std::string name;
    std::string type;  // "string", "integer", "date-time", "window"
    std::vector<std::string> values;  // allowed values for enums
    bool required = false;
    std::string default_value;
    std::string description;
};

struct RouteSpec {
    std::string path;
    std::string summary;
    std::vector<ParamSpec> params;
    std::vector<int> error_statuses;
};

/// Every /v1 route with its accepted query parameters.
const std::vector<RouteSpec>& routes();
const RouteSpec* find_route(const std::string& path);

/// OpenAPI 3 document built from routes().
nlohmann::json openapi_document();

}  // namespace newsky::api
