#include "kasper/corpus.hpp"

#include "kasper/rng.hpp"

namespace kasper::corpus {

namespace {

// Frames shared verbatim across every class; only the topic chunk differs.
const std::vector<std::string> kSharedFrames = {
    "can you {ask_verb} me about {topic} {polite}",
    "hey kasper i {want_verb} {topic} {when}",
    "{topic} {polite}",
};

std::string with_topic(const std::string& frame, const std::string& topic_slot) {
  std::string out = frame;
  const std::string key = "{topic}";
  auto pos = out.find(key);
  out.replace(pos, key.size(), "{" + topic_slot + "}");
  return out;
}

}  // namespace

CorpusSpec default_spec() {
  CorpusSpec spec;

  spec.slots = {
      {"ask_verb", {"tell", "update", "brief", "inform"}},
      {"want_verb", {"need", "want", "would like"}},
      {"polite", {"please", "now", "right away", "for me", "when you get a chance"}},
      {"when", {"today", "tomorrow", "tonight", "this weekend", "on friday", "next week"}},
      {"city",
       {"london", "delhi", "paris", "mumbai", "tokyo", "berlin", "sydney", "chicago", "madrid",
        "cairo"}},
      {"person", {"alice", "rahul", "grandma", "my boss", "uncle joe", "priya"}},

      {"art_topic",
       {"modern painting", "renaissance sculpture", "abstract art", "nail art",
        "gallery openings", "watercolor technique"}},
      {"beauty_item", {"skincare", "haircare", "makeup", "grooming"}},
      {"art_style", {"baroque", "cubist", "impressionist", "gothic"}},

      {"finance_topic",
       {"interest rates", "the stock market", "mutual funds", "my portfolio", "exchange rates"}},
      {"market", {"nasdaq", "sensex", "dow jones", "nikkei"}},
      {"company",
       {"acme corp", "globex", "initech", "stark industries", "wayne enterprises"}},
      {"asset", {"gold", "bonds", "real estate", "silver"}},

      {"comm_topic", {"my missed calls", "my voicemail", "my inbox", "my contacts"}},

      {"car_topic",
       {"my tyre pressure", "the car battery", "the engine status", "my parking spot"}},

      {"dish", {"pasta", "biryani", "sushi", "tacos", "pancakes", "ramen", "falafel"}},
      {"restaurant", {"the olive tree", "spice garden", "casa blanca", "noodle house"}},
      {"food_topic", {"vegan restaurants", "street food", "wine pairing", "coffee brewing"}},

      {"game", {"chess", "trivia night", "word puzzles", "twenty questions", "sudoku"}},
      {"trivia_topic", {"space", "old movies", "ancient history", "animals", "geography"}},

      {"workout", {"cardio", "yoga", "strength", "pilates", "running"}},
      {"fitness_topic", {"yoga poses", "heart rate zones", "stretching", "hydration"}},

      {"hobby",
       {"photography", "birdwatching", "gardening", "origami", "stargazing", "knitting"}},

      {"invention", {"telephone", "radio", "lightbulb", "compass"}},
      {"country", {"france", "japan", "brazil", "kenya", "norway"}},
      {"landmark",
       {"eiffel tower", "great pyramid", "statue of liberty", "burj khalifa"}},
      {"knowledge_topic",
       {"the roman empire", "black holes", "photosynthesis", "the french revolution"}},
      {"word", {"serendipity", "ephemeral", "ubiquitous", "quixotic"}},

      {"lifestyle_topic",
       {"minimalism", "feng shui", "morning routines", "capsule wardrobes"}},
      {"room", {"closet", "kitchen", "garage", "study"}},

      {"movie",
       {"the last sunset", "iron galaxy", "midnight express", "the silent sea"}},
      {"show", {"space rangers", "the crown affair", "desert storm", "night court"}},
      {"genre", {"comedy", "thriller", "romance", "documentary", "horror"}},

      {"music_genre", {"jazz", "lo fi", "classical", "rock", "bollywood", "blues"}},
      {"artist", {"the midnight owls", "dj cosmos", "aria bloom", "the brass monkeys"}},

      {"news_topic",
       {"the election", "the economy", "the monsoon", "local politics", "the summit"}},

      {"joke_topic", {"cats", "mondays", "robots", "penguins", "programmers"}},

      {"problem",
       {"my wifi outage", "a leaking tap", "a flat tyre", "my locked account"}},
      {"number_a", {"seven", "twelve", "nineteen", "forty two", "eight"}},
      {"number_b", {"three", "eleven", "twenty", "six", "nine"}},

      {"task",
       {"water the plants", "submit the report", "call the bank", "renew my passport"}},
      {"duration", {"five minutes", "an hour", "ninety seconds", "two hours"}},
      {"productivity_topic",
       {"my calendar", "my deadlines", "time blocking", "my meeting notes"}},

      {"item",
       {"sneakers", "a phone case", "groceries", "a backpack", "headphones", "detergent"}},

      {"social_topic",
       {"my notifications", "my followers", "the group chat", "trending hashtags"}},

      {"sport", {"cricket", "football", "tennis", "basketball", "hockey"}},
      {"team", {"tigers", "rovers", "united", "falcons", "warriors"}},

      {"place", {"the airport", "downtown", "the office", "the mall"}},

      {"onoff", {"on", "off"}},
      {"temperature", {"eighteen", "twenty one", "twenty four", "sixteen"}},

      {"wx", {"rain", "snow", "drizzle", "hail"}},
      {"temp_adj", {"hot", "cold", "humid", "windy"}},
  };

  const auto shared = [](const std::string& topic_slot) {
    std::vector<std::string> frames;
    for (const auto& f : kSharedFrames) frames.push_back(with_topic(f, topic_slot));
    return frames;
  };
  const auto add = [&spec](int idx, std::vector<std::string> own,
                           std::vector<std::string> framed) {
    auto& out = spec.templates[idx];
    out = std::move(own);
    for (auto& f : framed) out.push_back(std::move(f));
  };

  add(0,  // Art and Beauty
      {"suggest a {beauty_item} routine for {when}",
       "who painted that {art_style} masterpiece in {city}",
       "i need makeup tips for {when}"},
      shared("art_topic"));
  add(1,  // Business and Finance
      {"how did the {market} perform {when}",
       "what is the stock price of {company}",
       "should i invest in {asset} {when}"},
      shared("finance_topic"));
  add(2,  // Communication
      {"call {person} {polite}",
       "send a message to {person} saying i am running late",
       "read my new emails from {person}"},
      shared("comm_topic"));
  add(3,  // Connected Car
      {"start the car engine {polite}",
       "is my car locked {when}",
       "how much fuel is left in the car"},
      shared("car_topic"));
  add(4,  // Food and Drink
      {"order some {dish} from {restaurant}",
       "find a recipe for {dish} {polite}",
       "book a table at {restaurant} for {when}"},
      shared("food_topic"));
  add(5,  // Games, Trivia, and Accessories
      {"lets play a round of {game} {polite}",
       "give me a trivia question about {trivia_topic}",
       "what is the high score in {game}"},
      shared("game"));
  add(6,  // Health and Fitness
      {"log my {workout} workout {when}",
       "how many calories did i burn {when}",
       "remind me to take my medicine {when}"},
      shared("fitness_topic"));
  add(7,  // Interests
      {"find me a new hobby like {hobby}",
       "recommend a podcast about {hobby} {when}",
       "i want to learn {hobby} {when}"},
      shared("hobby"));
  add(8,  // Knowledge
      {"who invented the {invention}",
       "what is the capital of {country}",
       "how tall is the {landmark}",
       "define the word {word} {polite}"},
      shared("knowledge_topic"));
  add(9,  // Lifestyle
      {"plan a relaxing evening for {when}",
       "suggest a self care idea for {when}",
       "how do i declutter my {room}"},
      shared("lifestyle_topic"));
  add(10,  // Movies and TV Shows
      {"play the trailer of {movie}",
       "when does {show} air {when}",
       "recommend a {genre} movie for {when}",
       "who stars in {show}"},
      shared("movie"));
  add(11,  // Music and Audio
      {"play some {music_genre} music {polite}",
       "skip this song {polite}",
       "queue the album by {artist} {when}"},
      shared("music_genre"));
  add(12,  // News
      {"what are the headlines {when}",
       "give me the latest news about {news_topic}",
       "any breaking news from {city} {when}"},
      shared("news_topic"));
  add(13,  // Novelty and Humour
      {"tell me a joke about {joke_topic}",
       "make me laugh {polite}",
       "give me a funny fact about {joke_topic}"},
      shared("joke_topic"));
  add(14,  // Problem Solving
      {"help me figure out {problem}",
       "what is {number_a} times {number_b}",
       "convert {number_a} miles to kilometers"},
      shared("problem"));
  add(15,  // Productivity
      {"add {task} to my todo list",
       "set a timer for {duration}",
       "remind me to {task} {when}",
       "schedule a meeting with {person} {when}"},
      shared("productivity_topic"));
  add(16,  // Shopping
      {"add {item} to my shopping cart",
       "where can i buy {item} {when}",
       "track my order of {item}",
       "compare prices for {item} in {city}"},
      shared("item"));
  add(17,  // Social
      {"post this photo to my feed {polite}",
       "what is {person} up to {when}",
       "wish {person} a happy birthday"},
      shared("social_topic"));
  add(18,  // Sports
      {"what is the score of the {sport} game",
       "when do the {team} play {when}",
       "show me highlights of the {sport} match {when}",
       "who won the {sport} championship"},
      shared("sport"));
  add(19,  // Travel and Transportation
      {"book a cab to {city} {when}",
       "how long is the flight to {city}",
       "what is the traffic like on the way to {place}",
       "find a hotel in {city} for {when}"},
      shared("place"));
  add(20,  // Utilities
      {"turn {onoff} the living room lights",
       "set the thermostat to {temperature} degrees",
       "is the front door locked {when}",
       "run the vacuum robot {when}"},
      shared("temperature"));
  add(21,  // Weather
      {"what is the weather like in {city}",
       "will it {wx} in {city} {when}",
       "how {temp_adj} is it outside {when}",
       "do i need an umbrella {when}"},
      shared("wx"));

  return spec;
}

namespace {

std::string fill_template(const std::string& pattern, const CorpusSpec& spec, DetRng& rng) {
  std::string out;
  out.reserve(pattern.size());
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      auto close = pattern.find('}', i);
      if (close == std::string::npos) throw UnknownSlot(pattern.substr(i));
      const std::string name = pattern.substr(i + 1, close - i - 1);
      auto it = spec.slots.find(name);
      if (it == spec.slots.end() || it->second.empty()) throw UnknownSlot(name);
      out += it->second[static_cast<std::size_t>(rng.next_below(it->second.size()))];
      i = close + 1;
    } else {
      out.push_back(pattern[i]);
      ++i;
    }
  }
  // squeeze doubled spaces left by empty fillers and trim
  std::string clean;
  clean.reserve(out.size());
  for (char c : out) {
    if (c == ' ' && (clean.empty() || clean.back() == ' ')) continue;
    clean.push_back(c);
  }
  while (!clean.empty() && clean.back() == ' ') clean.pop_back();
  return clean;
}

}  // namespace

intent::Dataset generate_corpus(const CorpusSpec& spec) {
  if (spec.per_class < 1) throw intent::IntentError("per_class must be >= 1");
  for (int c = 0; c < intent::kNumClasses; ++c) {
    auto it = spec.templates.find(c);
    if (it == spec.templates.end() || it->second.size() < 3) throw ClassWithoutTemplates(c);
  }

  DetRng rng(spec.seed);
  intent::Dataset data;
  data.examples.reserve(static_cast<std::size_t>(spec.per_class) * intent::kNumClasses);
  for (int c = 0; c < intent::kNumClasses; ++c) {
    const auto& patterns = spec.templates.at(c);
    for (int i = 0; i < spec.per_class; ++i) {
      const auto& pattern = patterns[static_cast<std::size_t>(i) % patterns.size()];
      data.examples.push_back({fill_template(pattern, spec, rng), c});
    }
  }
  return data;
}

}  // namespace kasper::corpus
