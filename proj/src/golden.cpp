#include "captchastar/golden.hpp"

#include "captchastar/generator.hpp"
#include "captchastar/kinematics.hpp"
#include "captchastar/wire.hpp"
#include "json.hpp"

namespace captchastar {

std::string golden_vectors(const PicturePool& pool, const GoldenOptions& options) {
    using nlohmann::json;
    GenParams params;
    params.pic_size = options.pic_size;
    params = validate_params(params);
    Rng rng(options.seed);
    json cases = json::array();
    for (std::size_t c = 0; c < options.challenges; ++c) {
        GenerateOptions go;
        go.id_source = [c] {
            char buf[33];
            std::snprintf(buf, sizeof buf, "%032zx", c + 1);
            return std::string(buf);
        };
        const Challenge ch = generate_challenge(params, pool, rng, go);
        const ClientChallenge received = wire::as_received(client_view(ch));
        json states = json::array();
        for (std::size_t k = 0; k < options.cursors_per_challenge; ++k) {
            const Point cursor{static_cast<double>(rng.uniform_int(0, DrawableSpace::side)),
                               static_cast<double>(rng.uniform_int(0, DrawableSpace::side))};
            json positions = json::array();
            for (const Point& p : state_at(received.stars, cursor).positions) {
                positions.push_back({p.x, p.y});
            }
            states.push_back({{"cursor", {cursor.x, cursor.y}}, {"positions", std::move(positions)}});
        }
        cases.push_back({{"challenge", json::parse(wire::encode_json(received))},
                         {"binary_b64", wire::base64_encode(wire::encode_binary(received))},
                         {"states", std::move(states)}});
    }
    return json{{"version", 1}, {"star_side", kStarSide}, {"cases", std::move(cases)}}.dump(1);
}

}  // namespace captchastar
