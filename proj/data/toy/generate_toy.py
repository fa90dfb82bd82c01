#!/usr/bin/env python3
"""Regenerates arithmetic.jsonl and mock_llm.json for the offline end-to-end run.

The mock LLM answers a question according to how the instruction ends:
  "... then state the answer."  -> the full worked solution (the reference)
  "... final number."           -> the bare number
  "Let's think step by step."   -> a one-line hedge plus the number
  anything else                 -> "I am not sure."
so evolution has a real signal to climb on.
"""
import json

ITEMS = [
    ("Joan had 8 kittens. She gave 2 kittens to her friends. How many kittens does she have now?", "8 - 2 = 6", 6),
    ("Sam found 35 seashells on the beach. He gave 18 of them to Joan. How many seashells does he have left?", "35 - 18 = 17", 17),
    ("Mary has 9 yellow marbles and John has 3 yellow marbles. How many yellow marbles do they have in all?", "9 + 3 = 12", 12),
    ("There are 7 crayons in the drawer. Mary put 3 more crayons in the drawer. How many crayons are in the drawer now?", "7 + 3 = 10", 10),
    ("Tom had 14 apples. He ate 5 of them. How many apples are left?", "14 - 5 = 9", 9),
    ("A baker made 24 muffins and sold 11. How many muffins remain?", "24 - 11 = 13", 13),
    ("Lisa read 12 pages on Monday and 15 pages on Tuesday. How many pages did she read in total?", "12 + 15 = 27", 27),
    ("There were 40 birds in a tree. 16 birds flew away. How many birds are still in the tree?", "40 - 16 = 24", 24),
    ("Ben has 6 red balloons and 8 blue balloons. How many balloons does he have?", "6 + 8 = 14", 14),
    ("A farmer had 50 eggs and broke 7. How many eggs are unbroken?", "50 - 7 = 43", 43),
    ("Nina picked 21 flowers and her sister picked 19. How many flowers did they pick together?", "21 + 19 = 40", 40),
    ("A library had 63 books on a shelf. 25 were borrowed. How many books are on the shelf now?", "63 - 25 = 38", 38),
    ("Carlos scored 17 points in the first game and 26 in the second. How many points did he score?", "17 + 26 = 43", 43),
    ("There are 30 students in a class and 12 are boys. How many girls are in the class?", "30 - 12 = 18", 18),
    ("Emma bought 4 packs of stickers and got 5 more as a gift. How many packs does she have?", "4 + 5 = 9", 9),
    ("A bus had 28 passengers. At the stop 9 got off. How many passengers are on the bus?", "28 - 9 = 19", 19),
    ("Leo had 11 toy cars and bought 13 more. How many toy cars does he have now?", "11 + 13 = 24", 24),
    ("A jar held 45 candies. The children ate 27. How many candies are left in the jar?", "45 - 27 = 18", 18),
    ("Mia planted 16 tulips and 14 roses. How many flowers did she plant?", "16 + 14 = 30", 30),
    ("A shop had 72 oranges and sold 38. How many oranges does the shop have left?", "72 - 38 = 34", 34),
]


def reference(calc, answer):
    return f"{calc}. The answer is {answer}."


def main():
    with open("arithmetic.jsonl", "w") as f:
        for i, (q, calc, ans) in enumerate(ITEMS):
            f.write(json.dumps({"id": f"toy-{i + 1:02d}", "question": q, "reference": reference(calc, ans)}) + "\n")

    rules = [
        {"pattern": "Classify the task type", "response": "arithmetic_reasoning"},
        {"pattern": "Select the evaluation metrics", "response": "similarity=0.7\ncomplexity=0.3"},
        {"pattern": "applying this strategy: breaking the task into steps.",
         "response": "Break the problem into smaller steps. Write each calculation, then state the answer."},
        {"pattern": "applying this strategy: explaining the reasoning behind each operation.",
         "response": "Explain each operation you perform, then state the answer."},
        {"pattern": "applying this strategy: adding a request to double-check the final answer.",
         "response": "Solve the problem and double-check the final number."},
        {"pattern": "applying this strategy: making the instruction shorter and more direct.",
         "response": "Give the final number."},
        {"pattern": "Reply with the improved instruction only.",
         "response": "Read the problem carefully and answer it."},
        {"pattern": "Thinking style: Think like a patient teacher",
         "response": "Explain the problem like a teacher and give the final number."},
        {"pattern": "Thinking style: Reason like a careful mathematician",
         "response": "Check every calculation and give the final number."},
        {"pattern": "Reply with the instruction only.", "response": "Answer the question."},
    ]
    for q, calc, ans in ITEMS:
        rules.append({"pattern": "then state the answer.\n\n" + q, "response": reference(calc, ans)})
        rules.append({"pattern": "final number.\n\n" + q, "response": str(ans)})
        rules.append({"pattern": "step by step.\n\n" + q, "response": f"Let me think about it. The answer is {ans}."})
    with open("mock_llm.json", "w") as f:
        json.dump({"rules": rules, "default": "I am not sure."}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
