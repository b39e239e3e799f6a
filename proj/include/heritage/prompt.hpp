#pragma once

#include <string>

#include "heritage/error.hpp"

namespace heritage::llm {

// Default façade-assessment prompt. The {{Adress}} placeholder (sic) is
// substituted at render time; everything else goes to the backend verbatim.
inline const std::string& default_prompt_template() {
    static const std::string tmpl =
        "As a cultural heritage value expert, assess the building in the image located at "
        "{{Adress}}. Valid values are provided in square brackets. When asked to rate on a "
        "scale, 1 represents minimal and 100 maximal value. Do not default to middle values "
        "unless they accurately reflect the assessment. When asked for a category, select "
        "exactly one category that fits best, unless explicitly asked to select multiple. Do "
        "not invent categories! If no evidence or external knowledge about the address is "
        "available, mark as false for boolean fields or assign a minimal score for numerical "
        "fields. Do not hallucinate! Return N/A option if it is impossible to answer the "
        "question, e.g., because the roof is not visible. Respond ONLY with a valid JSON "
        "object containing all the fields of the following dictionary. "
        "{construction_year: Estimated construction year. [1000-2024], "
        "famous_architect: Is the building associated with a famous architect? [true, false], "
        "landmark: Is the building a recognized landmark? [true, false], "
        "popularity: How popular is the building in the community? [1-100], "
        "state: How well maintained and undamaged is the building? [1-100], "
        "architectural_integrity: To what extent does the building appear to retain its "
        "original design, materials, and structural composition without visible modern "
        "alterations? [1-100], "
        "rarity: [1-100], "
        "style: [klassicism, romansk, gotik, renässans, barock, rokoko, nyklassicism, nygotik, "
        "nyrbarock, nyrenässans, nybarock, sekelskifte, nationalromantik, jugend, "
        "funktionalism, brutalism, high-tech, postmodernism, nyfunktionalism], "
        "construction_technique: [stolpverkshus, restimmerhus, resvirkeshus, plankhus, "
        "landshövdingehus, tegelhus, tjockhus, smalhus, lamellhus, punkthus, skivhus, "
        "burspråkshus], "
        "roof_shape: [flat, gabled, skillion, hipped, gambrel, pyramidal, crosspitched, "
        "sawtooth, cone, dome, onion, round, mansard, N/A], "
        "roof_material: [sheet metal, concrete, green, clay, copper, wood, straw, slate, "
        "bitumen, glass, asphalt, N/A], "
        "roof_color: [red, black, brown, green, grey, other, N/A], "
        "facade_material: [brick, concrete, wood, plaster, stone, metal, glass], "
        "facade_color: [red, yellow, white, blue, green, black, brown, grey, beige, other], "
        "facade_decoration: [1-100], "
        "window_area: What percentage of the total facade area is windows? [0-100], "
        "window_shape: [round, rectangular, rounded, square, N/A], "
        "window_number: [0-], "
        "window_avg_pane_number: Average number of panes per window. [1-], "
        "door_type: [single, double, portal, revolving, dutch, N/A], "
        "door_material: [metal, wood, glass, mixed, other, N/A], "
        "door_shape: [rectangular, arched, N/A], "
        "complexity: [1-100], "
        "symmetry: [1-100], "
        "floor_number: [1-], "
        "balcony_number: [0-], "
        "representative_time: How representative is the building for its construction time? "
        "[1-100], "
        "representative_place: How representative is the building for its location? [1-100], "
        "representative_culture: How representative is it for specific cultural, ethnical, "
        "religious, philosophical, or political expressions? [1-100], "
        "emotional_reaction: How positively people are likely to react to the building? "
        "[1-100], "
        "elements: Which elements are present? Choose ALL you can detect in the image: "
        "[balconies, bay_windows, dormers, gable_peaks, natural_stone_plinth, half_timbered, "
        "plaque, gates, colored_glass, wood_shutters, door_awning, front_steps, "
        "eave_decorations, window_casings, door_decorations, recessed_doorway, display_window, "
        "decorative_moldings, transom_window, pilasters, medallions, columns, cornice, "
        "tympanum, corbel, pediment], "
        "culture_historical: How does the building reflect historical events, specific time "
        "periods, and local activities? In what ways does it showcase different cultural, "
        "ethnic, religious, or philosophical influences? [1-100], "
        "aesthetic: Evaluate the building's overall architectural and artistic properties, "
        "e.g., facade composition, proportions, paintings, decorations, and ornaments. [1-100], "
        "social: Assess the attractiveness of the building and how positively it is perceived "
        "by different social groups. Consider which associations the building might evoke "
        "(e.g., beautiful, interesting, safe on the one hand, and ugly, boring, unsafe on the "
        "other) and how it serves the community. [1-100], "
        "visibility_score: How visible is the building in the image based on the following "
        "criteria: 1. Building is shown from the outside, 2. All floors and windows, as well "
        "as the roof, are clearly visible and not cut off. 3. It completely fills the image "
        "both vertically and horizontally. 4. No obstructions such as vehicles, vegetation, or "
        "scaffolding are covering significant parts of it. 5. Only one building is shown. "
        "[1-100]}";
    return tmpl;
}

inline constexpr const char* kAddressPlaceholder = "{{Adress}}";

// Substitutes the address placeholder, required to occur exactly once.
inline std::string render_prompt(const std::string& address, const std::string& tmpl) {
    const std::string placeholder = kAddressPlaceholder;
    const auto first = tmpl.find(placeholder);
    require(first != std::string::npos, "llm/no-placeholder",
            "prompt template lacks the " + placeholder + " placeholder");
    require(tmpl.find(placeholder, first + placeholder.size()) == std::string::npos,
            "llm/duplicate-placeholder",
            "prompt template must contain " + placeholder + " exactly once");
    std::string out = tmpl;
    out.replace(first, placeholder.size(), address);
    return out;
}

inline std::string render_prompt(const std::string& address) {
    return render_prompt(address, default_prompt_template());
}

}  // namespace heritage::llm
