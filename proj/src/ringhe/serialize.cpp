#include "voicesearch/ringhe/serialize.hpp"

#include <string>

#include "voicesearch/common/error.hpp"

namespace voicesearch::ringhe {

using nlohmann::json;

json poly_to_json(const Poly& p) {
  json arr = json::array();
  for (u128 c : p) arr.push_back(to_decimal(c));
  return arr;
}

Poly poly_from_json(const json& j, const HeContext& ctx) {
  const auto& params = ctx.params();
  if (!j.is_array() || j.size() != params.n) {
    throw Error(Errc::malformed_record, "polynomial must hold " + std::to_string(params.n) + " coefficients");
  }
  Poly p(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    if (!j[i].is_string()) throw Error(Errc::malformed_record, "coefficient must be a decimal string");
    try {
      p[i] = parse_u128(j[i].get_ref<const std::string&>());
    } catch (const Error& e) {
      throw Error(Errc::malformed_record, e.what());
    }
    if (p[i] >= params.q) throw Error(Errc::malformed_record, "coefficient outside [0, q)");
  }
  return p;
}

json ciphertext_to_json(const Ciphertext& ct) {
  json polys = json::array();
  for (const auto& p : ct.coefficients()) polys.push_back(poly_to_json(p));
  return json{{"deg", ct.degree()}, {"polys", std::move(polys)}};
}

Ciphertext ciphertext_from_json(const json& j, const ContextPtr& ctx) {
  if (!j.is_object() || !j.contains("deg") || !j.contains("polys") || !j["deg"].is_number_unsigned() ||
      !j["polys"].is_array()) {
    throw Error(Errc::malformed_record, "ciphertext must be {deg, polys}");
  }
  const auto deg = j["deg"].get<std::size_t>();
  const auto& polys = j["polys"];
  if (polys.size() != deg + 1) throw Error(Errc::malformed_record, "polys length must be deg + 1");
  std::vector<Poly> out;
  out.reserve(polys.size());
  for (const auto& p : polys) out.push_back(poly_from_json(p, *ctx));
  return Ciphertext::from_coefficients(ctx, std::move(out));
}

json params_to_json(const HeParams& params) {
  return json{{"p", std::to_string(params.p)},
              {"q", to_decimal(params.q)},
              {"n", params.n},
              {"sigma", params.sigma},
              {"S", params.scale}};
}

HeParams params_from_json(const json& j) {
  try {
    HeParams params;
    const u128 p = parse_u128(j.at("p").get<std::string>());
    if (p >= (u128{1} << 62)) throw Error(Errc::invalid_params, "p must be below 2^62");
    params.p = static_cast<std::uint64_t>(p);
    params.q = parse_u128(j.at("q").get<std::string>());
    params.n = j.at("n").get<std::size_t>();
    params.sigma = j.at("sigma").get<double>();
    params.scale = j.at("S").get<std::int64_t>();
    params.validate();
    return params;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_params, std::string("bad parameter document: ") + e.what());
  }
}

}  // namespace voicesearch::ringhe
