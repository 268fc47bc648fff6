#!/usr/bin/env python3
"""Writes fixtures/corpus.json and fixtures/caches/*.json.

Each task lists its sampled SQL strings with multiplicities. Samples are
shuffled with a per-task seed so duplicates and invalid samples are spread
through the cache the way real sampling output would be.
"""

import json
import pathlib
import random

ROOT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def table(name, columns, rows):
    return {"name": name, "columns": [{"name": n, "type": t} for n, t in columns], "rows": rows}


TASKS = []


def task(tid, kind, utterance, tables, gold, samples):
    assert sum(n for _, n in samples) == 50, (tid, sum(n for _, n in samples))
    TASKS.append({"id": tid, "ambiguity_type": kind, "utterance": utterance,
                  "db": {"tables": tables}, "gold_sqls": gold, "samples": samples})


# --- scope -----------------------------------------------------------------

task("scope_gym_classes", "scope", "Which class does each gym offer?",
     [table("gyms", [("id", "integer"), ("name", "text")],
            [[1, "Northside"], [2, "Riverside"], [3, "Hilltop"]]),
      table("classes", [("id", "integer"), ("name", "text")],
            [[1, "yoga"], [2, "boxing"], [3, "pilates"], [4, "spinning"]]),
      table("offers", [("gym_id", "integer"), ("class_id", "integer")],
            [[1, 1], [1, 2], [1, 3], [2, 1], [2, 3], [3, 1], [3, 3], [3, 4]])],
     ["SELECT classes.name FROM classes JOIN offers ON offers.class_id = classes.id "
      "GROUP BY classes.name HAVING count(*) = 3",
      "SELECT gyms.name, classes.name FROM gyms JOIN offers ON offers.gym_id = gyms.id "
      "JOIN classes ON classes.id = offers.class_id"],
     [("SELECT g.name, c.name FROM gyms g JOIN offers o ON o.gym_id = g.id JOIN classes c ON c.id = o.class_id", 10),
      ("SELECT gyms.name, classes.name FROM gyms JOIN offers ON offers.gym_id = gyms.id "
       "JOIN classes ON classes.id = offers.class_id ORDER BY gyms.name", 3),
      ("SELECT classes.name FROM gyms JOIN offers ON offers.gym_id = gyms.id "
       "JOIN classes ON classes.id = offers.class_id", 4),
      ("SELECT c.name FROM classes c JOIN offers o ON o.class_id = c.id GROUP BY c.name HAVING count(*) = 3", 8),
      ("SELECT classes.name FROM classes JOIN offers ON offers.class_id = classes.id GROUP BY classes.name "
       "HAVING count(DISTINCT offers.gym_id) = (SELECT count(*) FROM gyms)", 4),
      ("SELECT classes.name FROM classes JOIN offers ON offers.class_id = classes.id GROUP BY classes.name "
       "HAVING count(*) > 1", 2),
      ("SELECT DISTINCT classes.name FROM classes JOIN offers ON offers.class_id = classes.id", 5),
      ("SELECT classes.name, count(*) FROM classes JOIN offers ON offers.class_id = classes.id "
       "GROUP BY classes.name", 4),
      ("SELECT gyms.name, count(*) FROM gyms JOIN offers ON offers.gym_id = gyms.id GROUP BY gyms.name", 2),
      ("SELECT name FROM classes", 3),
      ("SELECT class_name FROM classes", 3),
      ("SELEC name FROM classes", 1),
      ("SELECT name FROM classes WHERE id / 0 > 1", 1)])

task("scope_pizza_toppings", "scope", "What topping is on every pizza?",
     [table("pizzas", [("id", "integer"), ("name", "text"), ("price", "real")],
            [[1, "Margherita", 8.5], [2, "Diavola", 10.0], [3, "Funghi", 9.5], [4, "Capricciosa", 11.0]]),
      table("toppings", [("id", "integer"), ("name", "text")],
            [[1, "mozzarella"], [2, "tomato"], [3, "salami"], [4, "mushroom"], [5, "basil"]]),
      table("pizza_toppings", [("pizza_id", "integer"), ("topping_id", "integer")],
            [[1, 1], [1, 2], [1, 5], [2, 1], [2, 2], [2, 3], [3, 1], [3, 2], [3, 4],
             [4, 1], [4, 2], [4, 3], [4, 4]])],
     ["SELECT toppings.name FROM toppings JOIN pizza_toppings ON pizza_toppings.topping_id = toppings.id "
      "GROUP BY toppings.name HAVING count(*) = (SELECT count(*) FROM pizzas)",
      "SELECT pizzas.name, toppings.name FROM pizzas JOIN pizza_toppings ON pizza_toppings.pizza_id = pizzas.id "
      "JOIN toppings ON toppings.id = pizza_toppings.topping_id"],
     [("SELECT t.name FROM toppings t JOIN pizza_toppings pt ON pt.topping_id = t.id GROUP BY t.name "
       "HAVING count(*) = (SELECT count(*) FROM pizzas)", 9),
      ("SELECT toppings.name FROM toppings JOIN pizza_toppings ON pizza_toppings.topping_id = toppings.id "
       "GROUP BY toppings.name HAVING count(*) = 4", 6),
      ("SELECT toppings.name FROM toppings JOIN pizza_toppings ON pizza_toppings.topping_id = toppings.id "
       "GROUP BY toppings.name HAVING count(DISTINCT pizza_toppings.pizza_id) >= 4", 2),
      ("SELECT p.name, t.name FROM pizzas p JOIN pizza_toppings pt ON pt.pizza_id = p.id "
       "JOIN toppings t ON t.id = pt.topping_id", 9),
      ("SELECT pizzas.name, toppings.name FROM pizzas JOIN pizza_toppings ON pizza_toppings.pizza_id = pizzas.id "
       "JOIN toppings ON toppings.id = pizza_toppings.topping_id ORDER BY pizzas.name", 3),
      ("SELECT pizzas.name, count(*) FROM pizzas JOIN pizza_toppings ON pizza_toppings.pizza_id = pizzas.id "
       "GROUP BY pizzas.name", 3),
      ("SELECT DISTINCT toppings.name FROM toppings JOIN pizza_toppings "
       "ON pizza_toppings.topping_id = toppings.id", 4),
      ("SELECT toppings.name, count(*) FROM toppings JOIN pizza_toppings "
       "ON pizza_toppings.topping_id = toppings.id GROUP BY toppings.name", 3),
      ("SELECT name FROM toppings", 2),
      ("SELECT toppings.name FROM toppings JOIN pizza_toppings ON pizza_toppings.topping_id = toppings.id "
       "WHERE pizza_toppings.pizza_id = 1", 2),
      ("SELECT topping FROM pizzas", 4),
      ("SELECT name FROM toppings GROUP", 2),
      ("", 1)])

task("scope_school_subjects", "scope", "Which subject is taught at each school?",
     [table("schools", [("id", "integer"), ("name", "text"), ("district", "text")],
            [[1, "Oakwood", "north"], [2, "Maple", "south"], [3, "Cedar", "north"]]),
      table("subjects", [("id", "integer"), ("title", "text")],
            [[1, "math"], [2, "art"], [3, "physics"], [4, "music"]]),
      table("curriculum", [("school_id", "integer"), ("subject_id", "integer"), ("hours", "integer")],
            [[1, 1, 5], [1, 2, 2], [2, 1, 4], [2, 4, 3], [3, 1, 6], [3, 2, 1], [3, 3, 4]])],
     ["SELECT subjects.title FROM subjects JOIN curriculum ON curriculum.subject_id = subjects.id "
      "GROUP BY subjects.title HAVING count(*) = 3",
      "SELECT schools.name, subjects.title FROM schools JOIN curriculum ON curriculum.school_id = schools.id "
      "JOIN subjects ON subjects.id = curriculum.subject_id"],
     [("SELECT s.title FROM subjects s JOIN curriculum c ON c.subject_id = s.id GROUP BY s.title "
       "HAVING count(*) = 3", 7),
      ("SELECT subjects.title FROM subjects JOIN curriculum ON curriculum.subject_id = subjects.id "
       "GROUP BY subjects.title HAVING count(*) = (SELECT count(*) FROM schools)", 5),
      ("SELECT schools.name, subjects.title FROM schools JOIN curriculum ON curriculum.school_id = schools.id "
       "JOIN subjects ON subjects.id = curriculum.subject_id", 11),
      ("SELECT sc.name, su.title FROM schools sc JOIN curriculum cu ON cu.school_id = sc.id "
       "JOIN subjects su ON su.id = cu.subject_id ORDER BY sc.name, su.title", 3),
      ("SELECT schools.name, subjects.title, curriculum.hours FROM schools "
       "JOIN curriculum ON curriculum.school_id = schools.id JOIN subjects ON subjects.id = curriculum.subject_id",
       3),
      ("SELECT schools.name, count(*) FROM schools JOIN curriculum ON curriculum.school_id = schools.id "
       "GROUP BY schools.name", 3),
      ("SELECT DISTINCT subjects.title FROM subjects JOIN curriculum ON curriculum.subject_id = subjects.id", 4),
      ("SELECT subjects.title FROM subjects JOIN curriculum ON curriculum.subject_id = subjects.id "
       "JOIN schools ON schools.id = curriculum.school_id WHERE schools.district = 'north'", 3),
      ("SELECT title FROM subjects", 2),
      ("SELECT subject FROM schools", 3),
      ("SELECT title FROM subjects WHERE title = 5", 2),
      ("SELECT * FROM", 2),
      ("SELECT subjects.title FROM subjects JOIN curriculum ON curriculum.subject_id = subjects.id "
       "GROUP BY subjects.title HAVING sum(curriculum.hours) > 5", 2)])

# --- attachment --------------------------------------------------------------

venues = [table("venues", [("id", "integer"), ("name", "text"), ("kind", "text"), ("rooftop", "integer"),
                           ("city", "text")],
                [[1, "Grand Plaza", "hotel", 1, "Lisbon"], [2, "Harbor Inn", "hotel", 0, "Porto"],
                 [3, "Sky Bistro", "restaurant", 1, "Lisbon"], [4, "Old Tavern", "restaurant", 0, "Porto"],
                 [5, "Sunset Suites", "hotel", 1, "Porto"], [6, "Cellar Door", "restaurant", 0, "Lisbon"],
                 [7, "High Note", "bar", 1, "Lisbon"]])]

task("attach_venues_rooftop", "attachment", "List the hotels and restaurants with a rooftop terrace.",
     venues,
     ["SELECT name FROM venues WHERE kind IN ('hotel', 'restaurant') AND rooftop = 1",
      "SELECT name FROM venues WHERE kind = 'hotel' OR (kind = 'restaurant' AND rooftop = 1)"],
     [("SELECT name FROM venues WHERE kind IN ('hotel', 'restaurant') AND rooftop = 1", 9),
      ("SELECT name FROM venues WHERE (kind = 'hotel' OR kind = 'restaurant') AND rooftop = 1", 6),
      ("SELECT v.name FROM venues v WHERE v.rooftop = 1 AND v.kind IN ('hotel', 'restaurant')", 3),
      ("SELECT name FROM venues WHERE kind = 'hotel' OR (kind = 'restaurant' AND rooftop = 1)", 8),
      ("SELECT name FROM venues WHERE kind = 'hotel' OR kind = 'restaurant' AND rooftop = 1", 4),
      ("SELECT name, kind FROM venues WHERE kind IN ('hotel', 'restaurant') AND rooftop = 1", 4),
      ("SELECT name FROM venues WHERE rooftop = 1", 5),
      ("SELECT name FROM venues WHERE kind IN ('hotel', 'restaurant')", 3),
      ("SELECT name FROM venues WHERE kind = 'restaurant' AND rooftop = 1", 3),
      ("SELECT name FROM venues WHERE has_rooftop = 1", 3),
      ("SELECT name FROM venues WHERE rooftop = 'yes'", 1),
      ("SELECT name FROM venues WHERE kind IN ('hotel', 'restaurant') AND rooftop = 1 ORDER BY name", 1)])

task("attach_staff_experience", "attachment",
     "Show the doctors and nurses in cardiology with more than 10 years of experience.",
     [table("staff", [("id", "integer"), ("name", "text"), ("role", "text"), ("unit", "text"),
                      ("years", "integer")],
            [[1, "Ahmed", "doctor", "cardiology", 15], [2, "Berta", "doctor", "cardiology", 6],
             [3, "Chen", "nurse", "cardiology", 12], [4, "Dana", "nurse", "cardiology", 4],
             [5, "Eli", "doctor", "oncology", 20], [6, "Fay", "nurse", "oncology", 11],
             [7, "Gus", "technician", "cardiology", 14]])],
     ["SELECT name FROM staff WHERE role IN ('doctor', 'nurse') AND unit = 'cardiology' AND years > 10",
      "SELECT name FROM staff WHERE unit = 'cardiology' AND (role = 'doctor' OR (role = 'nurse' AND years > 10))"],
     [("SELECT name FROM staff WHERE role IN ('doctor', 'nurse') AND unit = 'cardiology' AND years > 10", 10),
      ("SELECT s.name FROM staff s WHERE s.unit = 'cardiology' AND s.years > 10 "
       "AND (s.role = 'doctor' OR s.role = 'nurse')", 5),
      ("SELECT name FROM staff WHERE unit = 'cardiology' AND (role = 'doctor' OR (role = 'nurse' AND years > 10))",
       8),
      ("SELECT name FROM staff WHERE unit = 'cardiology' AND role = 'doctor' OR role = 'nurse' AND years > 10", 3),
      ("SELECT name, role FROM staff WHERE role IN ('doctor', 'nurse') AND unit = 'cardiology' AND years > 10", 3),
      ("SELECT name FROM staff WHERE unit = 'cardiology' AND years > 10", 4),
      ("SELECT name FROM staff WHERE role IN ('doctor', 'nurse') AND unit = 'cardiology'", 4),
      ("SELECT name FROM staff WHERE role IN ('doctor', 'nurse') AND years > 10", 3),
      ("SELECT name FROM staff WHERE unit = 'cardiology' AND years >= 10", 2),
      ("SELECT name FROM staff WHERE department = 'cardiology'", 4),
      ("SELECT name FROM staff WHERE years > 10 AND", 2),
      ("SELECT name FROM staff WHERE role = 'nurse' AND unit = 'cardiology' AND years > 10", 2)])

task("attach_books_before_1950", "attachment", "Which novels and poems were published before 1950?",
     [table("books", [("id", "integer"), ("title", "text"), ("genre", "text"), ("year", "integer"),
                      ("author", "text")],
            [[1, "Dust Roads", "novel", 1939, "Ames"], [2, "Night Verses", "poem", 1921, "Bell"],
             [3, "Glass City", "novel", 1962, "Cole"], [4, "Salt Hymn", "poem", 1975, "Bell"],
             [5, "River Song", "poem", 1944, "Drew"], [6, "Late Harvest", "novel", 1988, "Ames"],
             [7, "Broken Clock", "essay", 1931, "Eads"]])],
     ["SELECT title FROM books WHERE genre IN ('novel', 'poem') AND year < 1950",
      "SELECT title FROM books WHERE genre = 'novel' OR (genre = 'poem' AND year < 1950)"],
     [("SELECT title FROM books WHERE genre IN ('novel', 'poem') AND year < 1950", 11),
      ("SELECT title FROM books WHERE (genre = 'novel' OR genre = 'poem') AND year < 1950", 6),
      ("SELECT b.title FROM books b WHERE b.year < 1950 AND b.genre IN ('novel', 'poem')", 2),
      ("SELECT title FROM books WHERE genre = 'novel' OR (genre = 'poem' AND year < 1950)", 7),
      ("SELECT title FROM books WHERE genre = 'novel' OR genre = 'poem' AND year < 1950", 3),
      ("SELECT title, year FROM books WHERE genre IN ('novel', 'poem') AND year < 1950", 4),
      ("SELECT title FROM books WHERE year < 1950", 4),
      ("SELECT title FROM books WHERE genre IN ('novel', 'poem')", 3),
      ("SELECT title FROM books WHERE genre IN ('novel', 'poem') AND year <= 1950 ORDER BY year", 2),
      ("SELECT title FROM books WHERE published < 1950", 4),
      ("SELECT title FROM books WHERE year < '1950'", 2),
      ("SELECT title, author FROM books WHERE genre = 'novel' OR (genre = 'poem' AND year < 1950)", 2)])

# --- vague -------------------------------------------------------------------

task("vague_store_location", "vague", "Where is each store located?",
     [table("stores", [("id", "integer"), ("name", "text"), ("city", "text"), ("address", "text"),
                       ("opened", "integer")],
            [[1, "Corner Books", "Austin", "12 Elm St", 2001], [2, "Page Turner", "Dallas", "4 Oak Ave", 2010],
             [3, "Ink Well", "Austin", "98 Pine Rd", 2015], [4, "Spine", "Houston", "7 Bay Blvd", 1998]])],
     ["SELECT name, city FROM stores",
      "SELECT name, address FROM stores",
      "SELECT name, address, city FROM stores"],
     [("SELECT name, city FROM stores", 10),
      ("SELECT s.name, s.city FROM stores s", 3),
      ("SELECT name, city FROM stores ORDER BY name", 3),
      ("SELECT name, address FROM stores", 9),
      ("SELECT name, address, city FROM stores", 6),
      ("SELECT name, city, address FROM stores", 2),
      ("SELECT city FROM stores", 3),
      ("SELECT address FROM stores", 2),
      ("SELECT DISTINCT city FROM stores", 2),
      ("SELECT name, location FROM stores", 4),
      ("SELECT name, city || ', ' || address FROM stores", 2),
      ("SELECT name, city FROM stores WHERE opened > 2000", 2),
      ("SELECT name city FROM stores GROUP", 2)])

task("vague_laptop_price", "vague", "How much does each laptop cost?",
     [table("laptops", [("id", "integer"), ("model", "text"), ("list_price", "real"), ("sale_price", "real"),
                        ("brand", "text")],
            [[1, "Aero 14", 1299.0, 1099.0, "Axon"], [2, "Blade S", 999.0, 949.0, "Byte"],
             [3, "Core X", 1499.0, 1499.0, "Axon"], [4, "Dash 13", 799.0, 699.0, "Cirrus"],
             [5, "Edge Pro", 1899.0, 1649.0, "Byte"]])],
     ["SELECT model, list_price FROM laptops",
      "SELECT model, sale_price FROM laptops"],
     [("SELECT model, list_price FROM laptops", 12),
      ("SELECT l.model, l.list_price FROM laptops l", 3),
      ("SELECT model, sale_price FROM laptops", 9),
      ("SELECT model, sale_price FROM laptops ORDER BY sale_price", 3),
      ("SELECT model, list_price, sale_price FROM laptops", 5),
      ("SELECT model, list_price FROM laptops ORDER BY list_price DESC", 3),
      ("SELECT model, min(list_price, sale_price) FROM laptops", 2),
      ("SELECT model, price FROM laptops", 5),
      ("SELECT avg(list_price) FROM laptops", 2),
      ("SELECT model, list_price FROM laptops WHERE brand = 'Axon'", 2),
      ("SELECT model, sale_price FROM laptops WHERE sale_price < list_price", 2),
      ("SELECT model,, list_price FROM laptops", 2)])


def main():
    corpus = {"tasks": []}
    (ROOT / "caches").mkdir(parents=True, exist_ok=True)
    for i, t in enumerate(TASKS):
        corpus["tasks"].append({k: t[k] for k in ("id", "ambiguity_type", "utterance", "db", "gold_sqls")})
        samples = [sql for sql, n in t["samples"] for _ in range(n)]
        random.Random(1000 + i).shuffle(samples)
        cache = {"task_id": t["id"], "model": "fixture", "temperature": 0.7, "samples": samples}
        (ROOT / "caches" / f"{t['id']}.json").write_text(json.dumps(cache, indent=2) + "\n")
    (ROOT / "corpus.json").write_text(json.dumps(corpus, indent=2) + "\n")


if __name__ == "__main__":
    main()
