#include "lexicon_data.hpp"

namespace capcom::coverage::detail {

// Base-form vocabulary of common image-caption nouns.
const std::vector<std::string_view>& base_nouns() {
  static const std::vector<std::string_view> words = {
      "adult", "airplane", "airport", "animal", "apple", "area", "arm", "audience", "baby",
      "back", "background", "backpack", "bag", "ball", "balloon", "banana", "bank", "bar",
      "baseball", "basket", "bat", "bathroom", "bathtub", "beach", "bear", "bed", "bedroom",
      "bench", "bicycle", "bike", "bird", "blanket", "board", "boat", "body", "book",
      "bottle", "bowl", "box", "boy", "branch", "bread", "bridge", "broccoli", "brick",
      "building", "bus", "bush", "cabinet", "cake", "camera", "car", "cart", "cat", "ceiling",
      "chair", "cheese", "chicken", "child", "church", "city", "clock", "cloud", "coat",
      "computer", "counter", "couch", "court", "cow", "crowd", "cup", "curtain", "desk",
      "dessert", "dinner", "dirt", "dish", "dog", "donut", "door", "doughnut", "drink",
      "dress", "edge", "egg", "elephant", "engine", "face", "fence", "field", "fire",
      "fireplace", "fish", "flag", "floor", "flower", "food", "foot", "fork", "frisbee",
      "fruit", "game", "garden", "giraffe", "girl", "glass", "glove", "goat", "grass",
      "ground", "group", "guy", "hair", "hand", "hat", "head", "helmet", "hill", "hillside",
      "home", "horse", "hotdog", "house", "hydrant", "ice", "image", "intersection",
      "island", "jacket", "keyboard", "kid", "kitchen", "kite", "knife", "lady", "lake",
      "lamp", "laptop", "lawn", "leaf", "leg", "light", "lot", "luggage", "lunch", "man",
      "market", "meal", "meat", "microwave", "mirror", "monitor", "motorcycle", "mountain",
      "mouse", "mouth", "net", "ocean", "orange", "oven", "pan", "pants", "paper", "park",
      "parking", "pasta", "path", "people", "person", "phone", "photo", "picture", "piece",
      "pillow", "pizza", "plane", "plant", "plate", "platform", "player", "pole", "pond",
      "pot", "purse", "racket", "rack", "railroad", "rain", "refrigerator", "restaurant",
      "rider", "river", "road", "rock", "roof", "room", "rug", "salad", "sand", "sandwich",
      "sauce", "scissors", "screen", "sea", "seat", "shelf", "sheep", "shirt", "shore",
      "sidewalk", "sign", "sink", "skateboard", "skateboarder", "skater", "ski", "skier",
      "sky", "slope", "snow", "snowboard", "sofa", "soup", "spoon", "stand", "station",
      "statue", "steam", "stop", "store", "street", "suit", "suitcase", "sun", "surfboard",
      "surfer", "table", "teddy", "television", "tennis", "tie", "toilet", "tomato", "top",
      "towel", "tower", "town", "toy", "track", "traffic", "trail", "train", "tray", "tree",
      "truck", "tub", "umbrella", "vase", "vegetable", "vehicle", "wall", "water", "wave",
      "window", "wine", "woman", "wood", "yard", "zebra"};
  return words;
}

// Base-form vocabulary of common image-caption verbs.
const std::vector<std::string_view>& base_verbs() {
  static const std::vector<std::string_view> words = {
      "bite", "blow", "carry", "catch", "chase", "climb", "cook", "cover", "cross", "cut",
      "drink", "drive", "eat", "fill", "fly", "go", "graze", "grow", "hang", "hit", "hold",
      "jump", "kick", "lay", "lean", "lie", "look", "make", "move", "open", "pack", "paint",
      "park", "perform", "pet", "pick", "place", "play", "point", "pose", "prepare", "pull",
      "push", "put", "race", "read", "rest", "ride", "roll", "run", "serve", "set", "sit",
      "skate", "ski", "sleep", "slice", "smile", "snowboard", "speak", "stand", "stare",
      "stop", "surf", "swim", "swing", "take", "talk", "throw", "touch", "travel", "try",
      "turn", "type", "use", "wait", "walk", "wash", "watch", "wear", "work", "write"};
  return words;
}

const std::vector<std::pair<std::string_view, std::string_view>>& irregular_nouns() {
  static const std::vector<std::pair<std::string_view, std::string_view>> forms = {
      {"children", "child"}, {"men", "man"},       {"women", "woman"}, {"people", "person"},
      {"feet", "foot"},      {"teeth", "tooth"},   {"mice", "mouse"},  {"geese", "goose"},
      {"knives", "knife"},   {"leaves", "leaf"},   {"shelves", "shelf"}, {"wolves", "wolf"},
      {"loaves", "loaf"},    {"halves", "half"},   {"sheep", "sheep"}, {"fish", "fish"},
      {"pants", "pants"},    {"scissors", "scissors"}, {"glasses", "glass"},
      {"buses", "bus"},      {"skis", "ski"},      {"dishes", "dish"}, {"boxes", "box"},
      {"benches", "bench"},  {"sandwiches", "sandwich"}, {"tomatoes", "tomato"},
      {"potatoes", "potato"}};
  return forms;
}

const std::vector<std::pair<std::string_view, std::string_view>>& irregular_verbs() {
  static const std::vector<std::pair<std::string_view, std::string_view>> forms = {
      {"sat", "sit"},     {"sitting", "sit"},   {"ran", "run"},       {"running", "run"},
      {"lying", "lie"},   {"laying", "lay"},    {"ate", "eat"},       {"eaten", "eat"},
      {"flew", "fly"},    {"flown", "fly"},     {"flies", "fly"},     {"rode", "ride"},
      {"ridden", "ride"}, {"stood", "stand"},   {"held", "hold"},     {"threw", "throw"},
      {"thrown", "throw"}, {"caught", "catch"}, {"took", "take"},     {"taken", "take"},
      {"made", "make"},   {"went", "go"},       {"gone", "go"},       {"goes", "go"},
      {"hung", "hang"},   {"swam", "swim"},     {"swimming", "swim"}, {"cutting", "cut"},
      {"hitting", "hit"}, {"putting", "put"},   {"setting", "set"},   {"wore", "wear"},
      {"worn", "wear"},   {"drove", "drive"},   {"driven", "drive"},  {"grew", "grow"},
      {"grown", "grow"},  {"blew", "blow"},     {"blown", "blow"},    {"wrote", "write"},
      {"written", "write"}, {"spoke", "speak"}, {"spoken", "speak"},  {"drank", "drink"},
      {"slept", "sleep"}, {"swung", "swing"},   {"petting", "pet"},   {"shopping", "shop"},
      {"stopped", "stop"}, {"stopping", "stop"}, {"tried", "try"},    {"carried", "carry"},
      {"carries", "carry"}, {"lies", "lie"},    {"tries", "try"}};
  return forms;
}

const std::vector<std::string_view>& determiners() {
  static const std::vector<std::string_view> words = {
      "a",     "an",    "the",   "this",  "that",   "these", "those", "some",  "many",
      "several", "his", "her",   "their", "its",    "my",    "your",  "our",   "two",
      "three", "four",  "five",  "six",   "seven",  "eight", "nine",  "ten",   "each",
      "every", "another", "other", "few", "of"};
  return words;
}

const std::vector<std::string_view>& auxiliaries() {
  static const std::vector<std::string_view> words = {
      "be", "is", "are", "was", "were", "been", "being", "am", "have", "has", "had",
      "having", "do", "does", "did", "can", "could", "will", "would", "may", "might",
      "must", "shall", "should", "seems", "seem", "appears", "appear"};
  return words;
}

}  // namespace capcom::coverage::detail
