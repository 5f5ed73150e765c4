#!/usr/bin/env python3
"""Regenerates fixtures/mini_sider.tsv, a small synthetic SIDER-shaped table.

Layout: drug_id, drug_name, atc_codes (';'-separated), term_type, term_id,
term_name, soc. The file deliberately contains rows that ingestion must drop
(LLT rows, drugs without ATC codes) and duplicate PT rows that must collapse.
"""
import random
import sys

DRUGS = [
    ("aspirin", "N02BA01;B01AC06"),
    ("metformin", "A10BA02"),
    ("ibuprofen", "M01AE01;C01EB16"),
    ("naproxen", "M01AE02"),
    ("diclofenac", "M01AB05;S01BC03"),
    ("paracetamol", "N02BE01"),
    ("warfarin", "B01AA03"),
    ("heparin", "B01AB01;C05BA03"),
    ("clopidogrel", "B01AC04"),
    ("atorvastatin", "C10AA05"),
    ("simvastatin", "C10AA01"),
    ("lisinopril", "C09AA03"),
    ("amlodipine", "C08CA01"),
    ("metoprolol", "C07AB02"),
    ("furosemide", "C03CA01"),
    ("digoxin", "C01AA05"),
    ("amiodarone", "C01BD01"),
    ("omeprazole", "A02BC01"),
    ("ranitidine", "A02BA02"),
    ("ondansetron", "A04AA01"),
    ("insulin glargine", "A10AE04"),
    ("glipizide", "A10BB07"),
    ("levothyroxine", "H03AA01"),
    ("prednisone", "H02AB07;A07EA03"),
    ("dexamethasone", "H02AB02;S01BA01"),
    ("amoxicillin", "J01CA04"),
    ("ciprofloxacin", "J01MA02;S01AE03"),
    ("doxycycline", "J01AA02"),
    ("vancomycin", "J01XA01"),
    ("fluconazole", "J02AC01"),
    ("acyclovir", "J05AB01;D06BB03"),
    ("methotrexate", "L01BA01;L04AX03"),
    ("cyclophosphamide", "L01AA01"),
    ("tamoxifen", "L02BA01"),
    ("cisplatin", "L01XA01"),
    ("sertraline", "N06AB06"),
    ("fluoxetine", "N06AB03"),
    ("amitriptyline", "N06AA09"),
    ("diazepam", "N05BA01"),
    ("haloperidol", "N05AD01"),
    ("lithium", "N05AN01"),
    ("valproic acid", "N03AG01"),
    ("carbamazepine", "N03AF01"),
    ("levodopa", "N04BA01"),
    ("morphine", "N02AA01"),
    ("tramadol", "N02AX02"),
    ("sumatriptan", "N02CC01"),
    ("salbutamol", "R03AC02"),
    ("montelukast", "R03DC03"),
    ("cetirizine", "R06AE07"),
    ("estradiol", "G03CA03"),
    ("ethinyl estradiol", "G03CA01"),
    ("sildenafil", "G04BE03"),
    ("allopurinol", "M04AA01"),
    ("alendronic acid", "M05BA04"),
    ("isotretinoin", "D10BA01"),
    ("timolol", "S01ED01;C07AA06"),
    ("ivermectin", "P02CF01"),
    ("chloroquine", "P01BA01"),
    ("iodixanol", "V08AB09"),
]

# Drugs that only ever appear without ATC codes; ingestion drops them.
NO_ATC_DRUGS = ["investigational compound", "herbal extract"]

TERMS = [
    ("headache", "Nervous system disorders"),
    ("dizziness", "Nervous system disorders"),
    ("somnolence", "Nervous system disorders"),
    ("seizure", "Nervous system disorders"),
    ("tremor", "Nervous system disorders"),
    ("paraesthesia", "Nervous system disorders"),
    ("syncope", "Nervous system disorders"),
    ("nausea", "Gastrointestinal disorders"),
    ("vomiting", "Gastrointestinal disorders"),
    ("diarrhoea", "Gastrointestinal disorders"),
    ("constipation", "Gastrointestinal disorders"),
    ("abdominal pain", "Gastrointestinal disorders"),
    ("dyspepsia", "Gastrointestinal disorders"),
    ("peptic ulcer", "Gastrointestinal disorders"),
    ("ulcer", "General disorders and administration site conditions"),
    ("gastrointestinal haemorrhage", "Gastrointestinal disorders"),
    ("pancreatitis", "Gastrointestinal disorders"),
    ("dry mouth", "Gastrointestinal disorders"),
    ("urticaria", "Skin and subcutaneous tissue disorders"),
    ("rash", "Skin and subcutaneous tissue disorders"),
    ("pruritus", "Skin and subcutaneous tissue disorders"),
    ("alopecia", "Skin and subcutaneous tissue disorders"),
    ("photosensitivity reaction", "Skin and subcutaneous tissue disorders"),
    ("stevens-johnson syndrome", "Skin and subcutaneous tissue disorders"),
    ("hyperhidrosis", "Skin and subcutaneous tissue disorders"),
    ("shock", "Vascular disorders"),
    ("hypotension", "Vascular disorders"),
    ("hypertension", "Vascular disorders"),
    ("flushing", "Vascular disorders"),
    ("raynaud's phenomenon", "Vascular disorders"),
    ("contusion", "Injury, poisoning and procedural complications"),
    ("fall", "Injury, poisoning and procedural complications"),
    ("tachycardia", "Cardiac disorders"),
    ("bradycardia", "Cardiac disorders"),
    ("palpitations", "Cardiac disorders"),
    ("atrial fibrillation", "Cardiac disorders"),
    ("cardiac failure", "Cardiac disorders"),
    ("anaemia", "Blood and lymphatic system disorders"),
    ("thrombocytopenia", "Blood and lymphatic system disorders"),
    ("neutropenia", "Blood and lymphatic system disorders"),
    ("agranulocytosis", "Blood and lymphatic system disorders"),
    ("hepatitis", "Hepatobiliary disorders"),
    ("jaundice", "Hepatobiliary disorders"),
    ("cholestasis", "Hepatobiliary disorders"),
    ("renal failure", "Renal and urinary disorders"),
    ("urinary retention", "Renal and urinary disorders"),
    ("haematuria", "Renal and urinary disorders"),
    ("cough", "Respiratory, thoracic and mediastinal disorders"),
    ("dyspnoea", "Respiratory, thoracic and mediastinal disorders"),
    ("bronchospasm", "Respiratory, thoracic and mediastinal disorders"),
    ("epistaxis", "Respiratory, thoracic and mediastinal disorders"),
    ("insomnia", "Psychiatric disorders"),
    ("depression", "Psychiatric disorders"),
    ("anxiety", "Psychiatric disorders"),
    ("confusional state", "Psychiatric disorders"),
    ("hallucination", "Psychiatric disorders"),
    ("arthralgia", "Musculoskeletal and connective tissue disorders"),
    ("myalgia", "Musculoskeletal and connective tissue disorders"),
    ("rhabdomyolysis", "Musculoskeletal and connective tissue disorders"),
    ("osteonecrosis", "Musculoskeletal and connective tissue disorders"),
    ("fatigue", "General disorders and administration site conditions"),
    ("pyrexia", "General disorders and administration site conditions"),
    ("oedema peripheral", "General disorders and administration site conditions"),
    ("asthenia", "General disorders and administration site conditions"),
    ("hypoglycaemia", "Metabolism and nutrition disorders"),
    ("hyperkalaemia", "Metabolism and nutrition disorders"),
    ("hyponatraemia", "Metabolism and nutrition disorders"),
    ("decreased appetite", "Metabolism and nutrition disorders"),
    ("lactic acidosis", "Metabolism and nutrition disorders"),
    ("anaphylactic reaction", "Immune system disorders"),
    ("hypersensitivity", "Immune system disorders"),
    ("blurred vision", "Eye disorders"),
    ("cataract", "Eye disorders"),
    ("tinnitus", "Ear and labyrinth disorders"),
    ("vertigo", "Ear and labyrinth disorders"),
    ("erectile dysfunction", "Reproductive system and breast disorders"),
    ("gynaecomastia", "Reproductive system and breast disorders"),
    ("hypothyroidism", "Endocrine disorders"),
    ("weight increased", "Investigations"),
    ("hepatic enzyme increased", "Investigations"),
    ("infection", "Infections and infestations"),
    ("candidiasis", "Infections and infestations"),
    ("pneumonia", "Infections and infestations"),
]

# Terms rendered without an SOC label so the breakdown has an "unknown" group.
NO_SOC = {"hyperhidrosis", "fall", "tinnitus"}


def main(out_path):
    rng = random.Random(20240611)
    term_ids = {name: "C%07d" % (1000 + 37 * i) for i, (name, _) in enumerate(TERMS)}
    soc_of = dict(TERMS)
    names = [t for t, _ in TERMS]
    rows = []

    forced = {
        "aspirin": ["shock", "peptic ulcer", "contusion", "urticaria"],
        "metformin": ["headache", "lactic acidosis"],
    }
    for i, (drug, atc) in enumerate(DRUGS):
        drug_id = "CID%09d" % (2244 + 101 * i)
        # a handful of drugs stay below the ten-association eligibility cut
        count = 8 + (i % 2) if i % 11 == 5 else rng.randint(10, 30)
        pool = [n for n in names if n not in forced.get(drug, [])]
        chosen = forced.get(drug, []) + rng.sample(pool, count - len(forced.get(drug, [])))
        for term in chosen:
            soc = "" if term in NO_SOC else soc_of[term]
            rows.append((drug_id, drug, atc, "PT", term_ids[term], term, soc))
            if rng.random() < 0.2:
                # SIDER also lists lower-level terms for the same pair
                rows.append((drug_id, drug, atc, "LLT", term_ids[term], term, soc))
            if rng.random() < 0.1:
                rows.append((drug_id, drug.upper(), atc, "PT", term_ids[term], "  " + term.title(), soc))

    for j, drug in enumerate(NO_ATC_DRUGS):
        drug_id = "CID%09d" % (900000 + j)
        for term in rng.sample(names, 12):
            rows.append((drug_id, drug, "", "PT", term_ids[term], term, soc_of[term]))

    rng.shuffle(rows)
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("drug_id\tdrug_name\tatc_codes\tterm_type\tterm_id\tterm_name\tsoc\n")
        for row in rows:
            f.write("\t".join(row) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "mini_sider.tsv")
