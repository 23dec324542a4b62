//! Attribute and object-class names the directory knows about.
//!
//! The two encrypted attributes of the `pkiUserManagement` auxiliary class
//! are also accepted under their alternate spelling
//! (`encryptedUserPassword`, `encryptedUserCertificate`) and folded to the
//! OID-bearing names below.

pub const USER_PASSWORD: &str = "userPassword";
pub const USER_CERTIFICATE: &str = "userCertificate";
pub const USER_ENCRYPTED_PASSWORD: &str = "userEncryptedPassword";
pub const USER_ENCRYPTED_CERTIFICATE: &str = "userEncryptedCertificate";
pub const USER_PKCS12: &str = "userPKCS12";
pub const OBJECT_CLASS: &str = "objectClass";

pub const PKI_USER_MANAGEMENT: &str = "pkiUserManagement";
pub const PKI_USER_MANAGEMENT_OID: &str = "1.3.6.1.4.1.8301.3.2.2.1.6";
pub const USER_ENCRYPTED_PASSWORD_OID: &str = "1.3.6.1.4.1.8301.3.2.2.1.7";
pub const USER_ENCRYPTED_CERTIFICATE_OID: &str = "1.3.6.1.4.1.8301.3.2.2.1.8";
/// Octet string syntax.
pub const OCTET_STRING_SYNTAX: &str = "1.3.6.1.4.1.1466.115.121.1.40";

/// Pseudo-attribute naming the entry itself in access checks, used for
/// entry creation and removal.
pub const ENTRY: &str = "entry";

/// The attributes both provisioning schemes manipulate.
pub const SCHEME_ATTRIBUTES: [&str; 5] = [
    USER_PASSWORD,
    USER_CERTIFICATE,
    USER_ENCRYPTED_PASSWORD,
    USER_ENCRYPTED_CERTIFICATE,
    USER_PKCS12,
];

const SINGLE_VALUED: [&str; 4] = [
    USER_ENCRYPTED_PASSWORD,
    USER_ENCRYPTED_CERTIFICATE,
    USER_PASSWORD,
    USER_PKCS12,
];

const KNOWN: [&str; 10] = [
    USER_PASSWORD,
    USER_CERTIFICATE,
    USER_ENCRYPTED_PASSWORD,
    USER_ENCRYPTED_CERTIFICATE,
    USER_PKCS12,
    OBJECT_CLASS,
    "cn",
    "sn",
    "mail",
    "uid",
];

const ALIASES: [(&str, &str); 2] = [
    ("encryptedUserPassword", USER_ENCRYPTED_PASSWORD),
    ("encryptedUserCertificate", USER_ENCRYPTED_CERTIFICATE),
];

/// Maps an attribute name to its canonical spelling. Known names keep their
/// schema capitalization; anything else is case-folded.
pub fn canonical_attribute(name: &str) -> String {
    let name = name.trim();
    if let Some((_, target)) = ALIASES.iter().find(|(a, _)| a.eq_ignore_ascii_case(name)) {
        return (*target).to_string();
    }
    KNOWN
        .iter()
        .find(|k| k.eq_ignore_ascii_case(name))
        .map(|k| (*k).to_string())
        .unwrap_or_else(|| name.to_ascii_lowercase())
}

pub fn is_single_valued(canonical: &str) -> bool {
    SINGLE_VALUED.contains(&canonical)
}

/// Attributes whose presence requires the `pkiUserManagement` object class.
pub fn requires_pki_user_management(canonical: &str) -> bool {
    canonical == USER_ENCRYPTED_PASSWORD || canonical == USER_ENCRYPTED_CERTIFICATE
}

/// LDIF-style rendering of the auxiliary schema elements.
pub fn pki_user_management_ldif() -> String {
    format!(
        "( {PKI_USER_MANAGEMENT_OID} NAME '{PKI_USER_MANAGEMENT}' SUP top AUXILIARY \
         MAY ( {USER_ENCRYPTED_PASSWORD} $ {USER_ENCRYPTED_CERTIFICATE} ) )\n\
         ( {USER_ENCRYPTED_PASSWORD_OID} NAME '{USER_ENCRYPTED_PASSWORD}' EQUALITY octetStringMatch \
         SYNTAX {OCTET_STRING_SYNTAX} SINGLE-VALUE )\n\
         ( {USER_ENCRYPTED_CERTIFICATE_OID} NAME '{USER_ENCRYPTED_CERTIFICATE}' EQUALITY octetStringMatch \
         SYNTAX {OCTET_STRING_SYNTAX} SINGLE-VALUE )\n"
    )
}
